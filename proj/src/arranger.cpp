/**
 * @file arranger.cpp
 * @brief Texture library, phrase fitness, constrained Viterbi search and chord retargeting.
 */
#include "accord/arranger.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "accord/error.hpp"

namespace accord {

using nlohmann::json;

std::string_view complexityName(Complexity c) {
  switch (c) {
    case Complexity::Sparse: return "sparse";
    case Complexity::Medium: return "medium";
    case Complexity::Dense: return "dense";
  }
  return "medium";
}

Complexity parseComplexity(std::string_view text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "sparse") return Complexity::Sparse;
  if (t == "medium") return Complexity::Medium;
  if (t == "dense") return Complexity::Dense;
  throw DataError("complexity must be sparse, medium or dense, got '" + std::string(text) + "'");
}

double TexturePhrase::rhythmDensity() const { return onsetsPerBar(notes, slots()); }

int TexturePhrase::registerLow() const {
  int lo = 127;
  for (const auto& n : notes) lo = std::min(lo, n.pitch);
  return notes.empty() ? 0 : lo;
}

int TexturePhrase::registerHigh() const {
  int hi = 0;
  for (const auto& n : notes) hi = std::max(hi, n.pitch);
  return hi;
}

void TexturePhrase::validate() const {
  if (id.empty()) throw DataError("texture id is empty");
  if (length_bars != 4 && length_bars != 8) throw DataError("texture " + id + ": length_bars must be 4 or 8");
  if (static_cast<int>(source_chords.slots()) != slots()) {
    throw DataError("texture " + id + ": source_chords length does not match length_bars");
  }
  for (const auto& n : notes) {
    if (n.onset_slot < 0 || n.duration_slots < 1 || n.endSlot() > slots()) {
      throw DataError("texture " + id + ": note outside the phrase");
    }
    if (n.pitch < 0 || n.pitch > 127 || n.velocity < 1 || n.velocity > 127) {
      throw DataError("texture " + id + ": pitch or velocity out of range");
    }
  }
}

std::string textureToJsonLine(const TexturePhrase& t) {
  json chords = json::array();
  for (const auto& e : t.source_chords.events()) {
    chords.push_back({e.root.value(), e.quality == TriadQuality::Major ? "maj" : "min"});
  }
  json notes = json::array();
  for (const auto& n : t.notes) notes.push_back({n.onset_slot, n.duration_slots, n.pitch, n.velocity});
  json j;
  j["id"] = t.id;
  j["complexity"] = complexityName(t.complexity);
  j["length_bars"] = t.length_bars;
  j["source_chords"] = std::move(chords);
  j["notes"] = std::move(notes);
  j["source"] = t.source;
  return j.dump();
}

namespace {

TexturePhrase textureFromJson(const json& j) {
  TexturePhrase t;
  try {
    t.id = j.at("id").get<std::string>();
    t.complexity = parseComplexity(j.at("complexity").get<std::string>());
    t.length_bars = j.at("length_bars").get<int>();
    std::vector<ChordEvent> chords;
    for (const auto& c : j.at("source_chords")) {
      const int root = c.at(0).get<int>();
      const auto q = c.at(1).get<std::string>();
      if (root < 0 || root > 11 || (q != "maj" && q != "min")) throw DataError("bad source_chords entry " + c.dump());
      chords.push_back({PitchClass(root), q == "maj" ? TriadQuality::Major : TriadQuality::Minor});
    }
    t.source_chords = ChordProgression(std::move(chords));
    for (const auto& n : j.at("notes")) {
      t.notes.push_back({n.at(0).get<int>(), n.at(1).get<int>(), n.at(2).get<int>(), n.at(3).get<int>()});
    }
    if (j.contains("source")) t.source = j["source"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("texture record: ") + e.what());
  }
  t.validate();
  return t;
}

int sign(int v) { return (v > 0) - (v < 0); }

bool isTriadTone(PitchClass pc, const ChordEvent& chord) {
  const int iv = intervalPc(chord.root, pc);
  return iv == 0 || iv == 7 || iv == (chord.quality == TriadQuality::Major ? 4 : 3);
}

/// Pitch with class `pc` nearest to `reference`; ties go down.
int nearestPitch(int reference, PitchClass pc) {
  const int down = reference - intervalPc(pc, PitchClass(reference));
  const int up = down == reference ? reference : down + 12;
  int p = (reference - down) <= (up - reference) ? down : up;
  while (p < 0) p += 12;
  while (p > 127) p -= 12;
  return p;
}

PitchClass mapPitchClass(PitchClass pc, const ChordEvent& from, const ChordEvent& to, const Key& key) {
  const int iv = intervalPc(from.root, pc);
  const int third = to.quality == TriadQuality::Major ? 4 : 3;
  if (iv == 0) return to.root;
  if (iv == 3 || iv == 4) return to.root.shifted(third);
  if (iv == 7) return to.root.shifted(7);
  // Non-triad tone: keep the interval above the root, then settle on a scale tone.
  const PitchClass moved = to.root.shifted(iv);
  if (isDiatonic(moved, key) || isTriadTone(moved, to)) return moved;
  for (int step : {-1, 1}) {
    if (isDiatonic(moved.shifted(step), key)) return moved.shifted(step);
  }
  return to.root;
}

std::vector<MelodyNote> phraseNotes(const AnnotatedMelody& melody, std::size_t phrase) {
  const int start = melody.phraseStartSlot(phrase);
  const int end = start + melody.phraseSlots(phrase);
  std::vector<MelodyNote> out;
  for (const auto& n : melody.notes) {
    if (n.onset_slot < start || n.onset_slot >= end) continue;
    MelodyNote m = n;
    m.onset_slot -= start;
    m.duration_slots = std::min(m.duration_slots, end - n.onset_slot);
    out.push_back(m);
  }
  return out;
}

TexturePhrase transposedTexture(const TexturePhrase& t, int shift) {
  TexturePhrase out = t;
  for (auto& n : out.notes) {
    n.pitch += shift;
    while (n.pitch < 0) n.pitch += 12;
    while (n.pitch > 127) n.pitch -= 12;
  }
  out.source_chords = t.source_chords.transposed(shift);
  return out;
}

const TexturePhrase& textureById(const TextureLibrary& textures, const std::string& id) {
  for (const auto& t : textures) {
    if (t.id == id) return t;
  }
  throw DataError("unknown texture id " + id);
}

std::vector<VoicingNote> renderPhrase(const TexturePhrase& texture, const HarmonizationResult& harmonization,
                                      std::size_t phrase, int start_slot, int end_slot) {
  const auto moved = transposedTexture(texture, harmonization.render_shift);
  auto notes = reharmonize(moved, harmonization.phraseChords(phrase), harmonization.key);
  for (auto& n : notes) {
    n.onset_slot += start_slot;
    n.duration_slots = std::min(n.duration_slots, end_slot - n.onset_slot);
  }
  return notes;
}

}  // namespace

TextureLibrary loadTextureLibrary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open texture library " + path.string());
  TextureLibrary out;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      json j = json::parse(line);
      out.push_back(textureFromJson(j));
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!ids.insert(out.back().id).second) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": duplicate texture id " + out.back().id);
    }
  }
  if (out.empty()) throw DataError("empty texture library: " + path.string());
  return out;
}

double onsetsPerBar(std::span<const VoicingNote> notes, int total_slots) {
  if (total_slots <= 0) return 0.0;
  std::set<int> onsets;
  for (const auto& n : notes) onsets.insert(n.onset_slot);
  return static_cast<double>(onsets.size()) * kTemplateSlotsPerBar / total_slots;
}

double phraseFitness(std::span<const MelodyNote> melody_notes, int phrase_slots, const TexturePhrase& texture,
                     const ArrangerConfig& config) {
  if (phrase_slots != texture.slots()) {
    throw PreconditionError("phrase fitness: texture " + texture.id + " covers " + std::to_string(texture.slots()) +
                            " slots, phrase " + std::to_string(phrase_slots));
  }
  if (texture.notes.empty()) return 0.0;

  std::set<int> onsets;
  int mel_lo = 127;
  int mel_hi = 0;
  for (const auto& n : melody_notes) {
    onsets.insert(n.onset_slot);
    mel_lo = std::min(mel_lo, n.pitch);
    mel_hi = std::max(mel_hi, n.pitch);
  }
  const double mel_density = static_cast<double>(onsets.size()) * kTemplateSlotsPerBar / phrase_slots;
  const double allowed = config.max_density_ratio * std::max(mel_density, 1.0);
  const double tex_density = texture.rhythmDensity();
  const double density_score = tex_density <= allowed ? 1.0 : allowed / tex_density;

  double register_score = 1.0;
  if (!melody_notes.empty()) {
    const int lo = texture.registerLow();
    const int hi = texture.registerHigh();
    double fraction = 0.0;
    if (hi == lo) {
      fraction = (lo >= mel_lo && lo <= mel_hi) ? 1.0 : 0.0;
    } else {
      const int overlap = std::max(0, std::min(hi, mel_hi) - std::max(lo, mel_lo));
      fraction = static_cast<double>(overlap) / (hi - lo);
    }
    register_score = 1.0 - fraction;
  }
  const double total_weight = config.density_weight + config.register_weight;
  if (total_weight <= 0.0) return 1.0;
  return (config.density_weight * density_score + config.register_weight * register_score) / total_weight;
}

double textureSmoothness(const TexturePhrase& a, const TexturePhrase& b) {
  const double center_a = 0.5 * (a.registerLow() + a.registerHigh());
  const double center_b = 0.5 * (b.registerLow() + b.registerHigh());
  const double reg = std::min(1.0, std::abs(center_a - center_b) / 24.0);
  const double da = a.rhythmDensity();
  const double db = b.rhythmDensity();
  const double dens = std::max(da, db) > 0.0 ? std::abs(da - db) / std::max(da, db) : 0.0;
  return 1.0 - 0.5 * (reg + dens);
}

TexturePath viterbiTextures(const TextureProblem& problem) {
  const std::size_t n = problem.options.size();
  if (n == 0) throw PreconditionError("texture search over zero phrases");

  // live[i]: groups seen at or before phrase i that reappear after it.
  std::vector<std::vector<int>> live(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<int> before;
    std::set<int> after;
    for (std::size_t j = 0; j <= i; ++j) {
      if (problem.groups[j] >= 0) before.insert(problem.groups[j]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (problem.groups[j] >= 0) after.insert(problem.groups[j]);
    }
    std::set_intersection(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(live[i]));
  }

  // State key: [texture at phrase i, texture of each live group in order].
  struct Node {
    double score;
    std::vector<int> prev;
  };
  std::vector<std::map<std::vector<int>, Node>> stages(n);

  auto assigned = [&](std::size_t stage, const std::vector<int>& key, int group) -> std::optional<int> {
    const auto& groups = live[stage];
    auto it = std::find(groups.begin(), groups.end(), group);
    if (it == groups.end()) return std::nullopt;
    return key[1 + static_cast<std::size_t>(it - groups.begin())];
  };

  for (std::size_t k = 0; k < problem.options[0].size(); ++k) {
    const int tex = problem.options[0][k];
    std::vector<int> key{tex};
    for (int g : live[0]) key.push_back(g == problem.groups[0] ? tex : -1);
    auto [it, fresh] = stages[0].emplace(key, Node{problem.fitness[0][k], {}});
    if (!fresh && problem.fitness[0][k] > it->second.score) it->second.score = problem.fitness[0][k];
  }

  for (std::size_t i = 1; i < n; ++i) {
    const int group = problem.groups[i];
    for (const auto& [key, node] : stages[i - 1]) {
      const std::optional<int> forced = group >= 0 ? assigned(i - 1, key, group) : std::nullopt;
      for (std::size_t k = 0; k < problem.options[i].size(); ++k) {
        const int tex = problem.options[i][k];
        if (forced && *forced != tex) continue;
        std::vector<int> next{tex};
        for (int g : live[i]) next.push_back(g == group ? tex : *assigned(i - 1, key, g));
        const double score = node.score + problem.fitness[i][k] +
                             problem.transition_weight * problem.smoothness(key[0], tex);
        auto it = stages[i].find(next);
        if (it == stages[i].end()) {
          stages[i].emplace(std::move(next), Node{score, key});
        } else if (score > it->second.score) {
          it->second = Node{score, key};
        }
      }
    }
    if (stages[i].empty()) throw DataError("no texture assignment satisfies the phrase-label constraint");
  }

  auto best = stages[n - 1].begin();
  for (auto it = stages[n - 1].begin(); it != stages[n - 1].end(); ++it) {
    if (it->second.score > best->second.score) best = it;
  }
  TexturePath path;
  path.score = best->second.score;
  path.textures.assign(n, 0);
  std::vector<int> key = best->first;
  for (std::size_t i = n; i-- > 0;) {
    path.textures[i] = key[0];
    if (i > 0) key = stages[i].at(key).prev;
  }
  return path;
}

TextureSearchResult searchTextures(const AnnotatedMelody& melody, const HarmonizationResult& harmonization,
                                   const TextureLibrary& textures, Complexity complexity,
                                   const ArrangerConfig& config) {
  if (harmonization.choices.size() != melody.phrases.size()) {
    throw PreconditionError("harmonization and melody disagree on the phrase count");
  }
  const AnnotatedMelody canon = melody.transposed(shiftToCanonical(melody.key));
  TextureSearchResult result;
  TextureProblem problem;
  problem.transition_weight = config.transition_weight;
  problem.smoothness = [&textures](int a, int b) {
    return textureSmoothness(textures[static_cast<std::size_t>(a)], textures[static_cast<std::size_t>(b)]);
  };

  std::map<std::pair<char, int>, int> group_of;
  for (std::size_t i = 0; i < canon.phrases.size(); ++i) {
    const int slots = canon.phraseSlots(i);
    std::vector<int> options;
    for (std::size_t t = 0; t < textures.size(); ++t) {
      if (textures[t].slots() == slots && textures[t].complexity == complexity) options.push_back(static_cast<int>(t));
    }
    if (options.empty()) {
      for (std::size_t t = 0; t < textures.size(); ++t) {
        if (textures[t].slots() == slots) options.push_back(static_cast<int>(t));
      }
      if (options.empty()) {
        throw DataError("no texture of matching length for phrase " + std::to_string(i + 1));
      }
      result.warnings.push_back("phrase " + std::to_string(i + 1) + ": no " + std::string(complexityName(complexity)) +
                                " texture of " + std::to_string(slots) + " slots, using all complexities");
    }
    std::sort(options.begin(), options.end(), [&textures](int a, int b) {
      return textures[static_cast<std::size_t>(a)].id < textures[static_cast<std::size_t>(b)].id;
    });

    const auto notes = phraseNotes(canon, i);
    std::vector<double> fitness;
    for (int t : options) fitness.push_back(phraseFitness(notes, slots, textures[static_cast<std::size_t>(t)], config));

    int group = -1;
    if (config.reuse_labels) {
      auto key = std::make_pair(canon.phrases[i].label, slots);
      group = group_of.emplace(key, static_cast<int>(group_of.size())).first->second;
    }
    problem.options.push_back(std::move(options));
    problem.fitness.push_back(std::move(fitness));
    problem.groups.push_back(group);
  }

  const auto path = viterbiTextures(problem);
  result.score = path.score;
  for (int t : path.textures) result.texture_ids.push_back(textures[static_cast<std::size_t>(t)].id);
  return result;
}

std::vector<VoicingNote> reharmonize(const TexturePhrase& texture, const ChordProgression& target_chords,
                                     const Key& target_key) {
  if (texture.source_chords.slots() != target_chords.slots()) {
    throw PreconditionError("reharmonize: texture has " + std::to_string(texture.source_chords.slots()) +
                            " chord slots, target has " + std::to_string(target_chords.slots()));
  }
  std::vector<VoicingNote> out = texture.notes;
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&out](std::size_t a, std::size_t b) {
    return out[a].onset_slot != out[b].onset_slot ? out[a].onset_slot < out[b].onset_slot : out[a].pitch < out[b].pitch;
  });

  int prev_onset = -1;
  int prev_bass_orig = -1;
  int prev_bass_new = -1;
  for (std::size_t idx : order) {
    const VoicingNote& orig = texture.notes[idx];
    VoicingNote& note = out[idx];
    const auto slot = static_cast<std::size_t>(orig.onset_slot);
    const ChordEvent& from = texture.source_chords[slot];
    const ChordEvent& to = target_chords[slot];
    const bool bass = orig.onset_slot != prev_onset;
    if (!(from == to)) {
      const PitchClass pc = mapPitchClass(PitchClass(orig.pitch), from, to, target_key);
      int pitch = nearestPitch(orig.pitch, pc);
      if (bass && prev_bass_orig >= 0) {
        const int want = sign(orig.pitch - prev_bass_orig);
        if (want != 0 && sign(pitch - prev_bass_new) != want) {
          const int alt = pitch + 12 * want;
          if (alt >= 0 && alt <= 127 && std::abs(alt - orig.pitch) <= 7 && sign(alt - prev_bass_new) == want) {
            pitch = alt;
          }
        }
      }
      note.pitch = pitch;
    }
    if (bass) {
      prev_onset = orig.onset_slot;
      prev_bass_orig = orig.pitch;
      prev_bass_new = note.pitch;
    }
  }
  return out;
}

Arrangement arrange(const AnnotatedMelody& melody, const HarmonizationResult& harmonization,
                    const TextureLibrary& textures, Complexity complexity, const ArrangerConfig& config) {
  melody.validate();
  if (harmonization.totalSlots() != melody.totalSlots()) {
    throw PreconditionError("harmonization covers " + std::to_string(harmonization.totalSlots()) +
                            " slots, melody " + std::to_string(melody.totalSlots()));
  }
  const auto search = searchTextures(melody, harmonization, textures, complexity, config);

  Arrangement a;
  a.melody_track = melody.notes;
  a.chords_used = harmonization.chords();
  a.texture_ids = search.texture_ids;
  a.key = melody.key;
  a.meter = melody.meter;
  a.complexity = complexity;
  a.warnings = search.warnings;
  for (std::size_t i = 0; i < melody.phrases.size(); ++i) {
    const int start = melody.phraseStartSlot(i);
    a.phrase_start_slots.push_back(start);
    const auto notes = renderPhrase(textureById(textures, search.texture_ids[i]), harmonization, i, start,
                                    start + melody.phraseSlots(i));
    a.accompaniment_track.insert(a.accompaniment_track.end(), notes.begin(), notes.end());
  }
  std::sort(a.accompaniment_track.begin(), a.accompaniment_track.end());
  return a;
}

Arrangement rearrangePhrase(const Arrangement& arrangement, const HarmonizationResult& harmonization,
                            const TextureLibrary& textures, std::size_t phrase) {
  if (phrase >= arrangement.texture_ids.size()) throw PreconditionError("phrase index out of range");
  Arrangement a = arrangement;
  const int start = a.phrase_start_slots[phrase];
  const int end = phrase + 1 < a.phrase_start_slots.size() ? a.phrase_start_slots[phrase + 1] : a.totalSlots();
  std::erase_if(a.accompaniment_track,
                [&](const VoicingNote& n) { return n.onset_slot >= start && n.onset_slot < end; });
  const auto notes = renderPhrase(textureById(textures, a.texture_ids[phrase]), harmonization, phrase, start, end);
  a.accompaniment_track.insert(a.accompaniment_track.end(), notes.begin(), notes.end());
  std::sort(a.accompaniment_track.begin(), a.accompaniment_track.end());
  const auto chords = harmonization.phraseChords(phrase);
  std::copy(chords.events().begin(), chords.events().end(), a.chords_used.begin() + start);
  return a;
}

std::size_t chordCoverageViolations(std::span<const VoicingNote> notes, std::span<const ChordEvent> chords,
                                    const Key& key) {
  std::size_t bad = 0;
  for (const auto& n : notes) {
    if (n.onset_slot < 0 || static_cast<std::size_t>(n.onset_slot) >= chords.size()) {
      ++bad;
      continue;
    }
    const PitchClass pc(n.pitch);
    if (!isTriadTone(pc, chords[static_cast<std::size_t>(n.onset_slot)]) && !isDiatonic(pc, key)) ++bad;
  }
  return bad;
}

}  // namespace accord
