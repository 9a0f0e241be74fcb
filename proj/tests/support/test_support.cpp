/**
 * @file test_support.cpp
 * @brief Builders and brute-force oracles used across the test binaries.
 */
#include "test_support.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "accord/curation.hpp"

namespace accord::test {

namespace fs = std::filesystem;

fs::path scratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("accord_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ChordProgression perBar(const std::vector<ChordEvent>& bars) {
  std::vector<ChordEvent> events;
  for (const auto& c : bars) events.insert(events.end(), kTemplateSlotsPerBar, c);
  return ChordProgression(std::move(events));
}

Template makeTemplate(const std::string& id, const ChordProgression& prog, Mode mode, StyleLabel style) {
  Template t;
  t.id = id;
  t.progression = prog;
  t.mode = mode;
  t.style = style;
  t.length_bars = prog.bars();
  t.source = "test";
  const auto& ev = prog.events();
  std::size_t run_start = 0;
  for (std::size_t s = 1; s <= ev.size(); ++s) {
    if (s < ev.size() && ev[s] == ev[run_start]) continue;
    const int root = ev[run_start].root.value();
    const int third = ev[run_start].quality == TriadQuality::Major ? 4 : 3;
    const int on = static_cast<int>(run_start);
    const int dur = static_cast<int>(s - run_start);
    t.voicing.push_back({on, dur, 36 + root, 80});
    for (int iv : {0, third, 7}) t.voicing.push_back({on, dur, 48 + root + iv, 80});
    run_start = s;
  }
  std::sort(t.voicing.begin(), t.voicing.end());
  return t;
}

ChordProgression randomProgression(std::mt19937_64& rng, int bars, Mode mode) {
  const Key key{canonicalTonic(mode), mode};
  const auto steps = scaleSteps(mode);
  std::uniform_int_distribution<int> degree(0, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&]() {
    if (u(rng) < 0.1) return ChordEvent{PitchClass(static_cast<int>(rng() % 12)), u(rng) < 0.5 ? TriadQuality::Major : TriadQuality::Minor};
    const int d = degree(rng);
    const PitchClass root = key.tonic.shifted(steps[static_cast<std::size_t>(d)]);
    const PitchClass third = root.shifted(4);
    return ChordEvent{root, isDiatonic(third, key) ? TriadQuality::Major : TriadQuality::Minor};
  };
  std::vector<ChordEvent> events;
  for (int b = 0; b < bars; ++b) {
    const ChordEvent a = pick();
    const ChordEvent c = u(rng) < 0.3 ? pick() : a;
    events.insert(events.end(), 4, a);
    events.insert(events.end(), 4, c);
  }
  return ChordProgression(std::move(events));
}

AnnotatedMelody randomMelody(std::mt19937_64& rng, const std::vector<int>& phrase_bars, Key key) {
  AnnotatedMelody m;
  m.key = key;
  int bar = 0;
  char label = 'A';
  for (int len : phrase_bars) {
    m.phrases.push_back({label++, len, bar});
    bar += len;
  }
  const int total = bar * 8;
  std::uniform_int_distribution<int> dur(1, 4);
  std::uniform_int_distribution<int> pitch(60, 81);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < total;) {
    const int d = std::min(dur(rng), total - s);
    if (u(rng) > 0.15) m.notes.push_back({s, d, pitch(rng)});
    s += d;
  }
  return m;
}

MicroLossTable randomMicroTable(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MicroLossTable t;
  for (auto* m : {&t.major, &t.minor}) {
    for (auto& row : *m) {
      for (auto& v : row) v = u(rng);
    }
  }
  t.non_diatonic_penalty = u(rng);
  return t;
}

BruteForceResult bruteForceHarmonize(const AnnotatedMelody& melody, const Library& lib,
                                     const TransitionStats& stats, const HarmonizerConfig& config) {
  const int shift = shiftToCanonical(melody.key);
  const AnnotatedMelody canon = melody.transposed(shift);
  const auto pitches = canon.slotPitches();
  const std::size_t p = canon.phrases.size();

  std::vector<std::vector<Candidate>> cands(p);
  std::vector<std::vector<double>> local(p);
  for (std::size_t i = 0; i < p; ++i) {
    cands[i] = generateCandidates(lib, canon.phrases[i].length_bars, canon.key.mode, config.style_filter);
    const int start = canon.phraseStartSlot(i);
    const int slots = canon.phraseSlots(i);
    const std::span<const int> slice(pitches.data() + start, static_cast<std::size_t>(slots));
    for (const auto& c : cands[i]) {
      const double mic = microLoss(slice, c.progression.events(), canon.key, config.micro_table);
      const double mes = mesoLoss(c, slots, stats);
      local[i].push_back(config.beta * (1.0 - mic) + (1.0 - config.beta) * (1.0 - mes));
    }
  }

  BruteForceResult out;
  out.best = -1e300;
  std::vector<std::size_t> idx(p, 0);
  while (true) {
    double score = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      score += local[i][idx[i]];
      if (i > 0) score += config.alpha * (1.0 - macroLoss(&cands[i - 1][idx[i - 1]], cands[i][idx[i]], stats));
    }
    ++out.tuples;
    if (score > out.best) {
      out.best = score;
      out.ids.clear();
      for (std::size_t i = 0; i < p; ++i) out.ids.push_back(cands[i][idx[i]].id());
    }
    std::size_t k = p;
    while (k-- > 0) {
      if (++idx[k] < cands[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

SmallInstance randomInstance(std::mt19937_64& rng, int max_phrases, int max_candidates) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Mode mode = u(rng) < 0.7 ? Mode::Major : Mode::Minor;
  const Mode other = mode == Mode::Major ? Mode::Minor : Mode::Major;
  const int phrases = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_phrases));
  const bool only_short = u(rng) < 0.5;

  int n4 = 0;
  int n8 = 0;
  std::vector<int> lengths;
  if (only_short) {
    n4 = 2 + static_cast<int>(rng() % static_cast<unsigned>(max_candidates - 1));
    n8 = static_cast<int>(rng() % 3);
    lengths.assign(static_cast<std::size_t>(phrases), 4);
  } else {
    n4 = 1 + static_cast<int>(rng() % 4);
    while (n4 * n4 >= max_candidates) --n4;
    n8 = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(4, max_candidates - n4 * n4)));
    for (int i = 0; i < phrases; ++i) lengths.push_back(u(rng) < 0.5 ? 4 : 8);
  }

  std::vector<Template> templates;
  std::set<std::string> sigs;
  auto add = [&](int bars, Mode m, int index) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto prog = randomProgression(rng, bars, m);
      const auto style = u(rng) < 0.5 ? StyleLabel::PopStandard : StyleLabel::PopComplex;
      char id[32];
      std::snprintf(id, sizeof id, "%c%d-%02d", m == Mode::Major ? 'M' : 'm', bars, index);
      Template t = makeTemplate(id, prog, m, style);
      if (sigs.insert(dedupSignature(t)).second) {
        templates.push_back(std::move(t));
        return;
      }
    }
  };
  for (int i = 0; i < n4; ++i) add(4, mode, i);
  for (int i = 0; i < n8; ++i) add(8, mode, i);
  for (int i = 0; i < 2; ++i) add(4, other, i);

  SmallInstance inst{Library(std::move(templates)), {}, {}};
  const Key key{PitchClass(static_cast<int>(rng() % 12)), mode};
  inst.melody = randomMelody(rng, lengths, key);
  inst.config.alpha = u(rng);
  inst.config.beta = u(rng);
  inst.config.micro_table = randomMicroTable(rng);
  inst.config.backend = u(rng) < 0.5 ? kernels::Backend::Serial : kernels::Backend::Parallel;
  return inst;
}

TexturePath bruteForceTextures(const TextureProblem& problem) {
  const std::size_t n = problem.options.size();
  TexturePath best;
  best.score = -1e300;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    bool ok = true;
    std::map<int, int> group_tex;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (problem.groups[i] < 0) continue;
      const int tex = problem.options[i][idx[i]];
      auto [it, fresh] = group_tex.emplace(problem.groups[i], tex);
      if (!fresh && it->second != tex) ok = false;
    }
    if (ok) {
      double score = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        score += problem.fitness[i][idx[i]];
        if (i > 0) {
          score += problem.transition_weight *
                   problem.smoothness(problem.options[i - 1][idx[i - 1]], problem.options[i][idx[i]]);
        }
      }
      if (score > best.score) {
        best.score = score;
        best.textures.clear();
        for (std::size_t i = 0; i < n; ++i) best.textures.push_back(problem.options[i][idx[i]]);
      }
    }
    std::size_t k = n;
    while (k-- > 0) {
      if (++idx[k] < problem.options[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return best;
}

TexturePhrase blockTexture(const std::string& id, const ChordProgression& chords, int onsets_per_bar,
                           int register_shift) {
  TexturePhrase t;
  t.id = id;
  t.length_bars = chords.bars();
  t.source_chords = chords;
  t.complexity = onsets_per_bar <= 2 ? Complexity::Sparse : (onsets_per_bar <= 4 ? Complexity::Medium : Complexity::Dense);
  const int step = kTemplateSlotsPerBar / onsets_per_bar;
  for (int s = 0; s < chords.slots(); s += step) {
    const auto& c = chords[static_cast<std::size_t>(s)];
    const int root = c.root.value();
    const int third = c.quality == TriadQuality::Major ? 4 : 3;
    t.notes.push_back({s, step, 36 + root + register_shift, 70});
    for (int iv : {0, third, 7}) t.notes.push_back({s, step, 48 + root + iv + register_shift, 60});
  }
  std::sort(t.notes.begin(), t.notes.end());
  return t;
}

double microLossBySlot(std::span<const int> pitches, std::span<const ChordEvent> chords, const Key& key) {
  // Cell value by interval of the melody above the chord root.
  static const double kCell[12] = {0.0, 0.7, 0.5, 0.25, 0.25, 0.15, 0.9, 0.1, 0.35, 0.35, 0.5, 0.7};
  static const int kMajor[7] = {0, 2, 4, 5, 7, 9, 11};
  static const int kMinor[7] = {0, 2, 3, 5, 7, 8, 10};
  const int* scale = key.mode == Mode::Major ? kMajor : kMinor;
  double sum = 0.0;
  int count = 0;
  for (std::size_t s = 0; s < pitches.size(); ++s) {
    if (pitches[s] < 0) continue;
    ++count;
    const int rel_root = ((chords[s].root.value() - key.tonic.value()) % 12 + 12) % 12;
    int degree = -1;
    for (int d = 0; d < 7; ++d) {
      if (scale[d] == rel_root) degree = d;
    }
    if (degree < 0) {
      sum += 0.6;
      continue;
    }
    const int above = ((pitches[s] - chords[s].root.value()) % 12 + 12) % 12;
    double v = kCell[above];
    const bool chord_tone = above == 0 || above == 3 || above == 4 || above == 7;
    if (key.mode == Mode::Minor && (degree == 4 || degree == 6) && !chord_tone) v = std::min(1.0, v + 0.1);
    sum += v;
  }
  return count == 0 ? 0.5 : sum / count;
}

namespace {

int sharpsFor(const Key& key) {
  const PitchClass major_tonic = key.mode == Mode::Major ? key.tonic : key.tonic.shifted(3);
  int s = PitchClass(major_tonic.value() * 7).value();  // 7 is its own inverse mod 12
  return s > 5 ? s - 12 : s;
}

}  // namespace

smf::MidiFile transposedMidi(const Template& t, int k) {
  Template copy = t;
  for (auto& n : copy.voicing) n.pitch += k;
  smf::MidiFile f = templateToMidi(copy);
  const Key key = transposed(Key{canonicalTonic(t.mode), t.mode}, k);
  for (auto& e : f.tracks[0].events) {
    if (e.kind == smf::EventKind::Meta && e.meta_type == 0x59) e.data[0] = static_cast<std::uint8_t>(sharpsFor(key));
  }
  return f;
}

}  // namespace accord::test
