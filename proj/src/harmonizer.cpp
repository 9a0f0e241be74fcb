/**
 * @file harmonizer.cpp
 * @brief Candidate generation, the phrase DP, identity grouping and restyling.
 */
#include "accord/harmonizer.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "accord/error.hpp"

namespace accord {

namespace {

bool passesFilter(const Template& t, const StyleFilter& filter) {
  return !filter || filter->count(t.style) > 0;
}

std::vector<VoicingNote> concatVoicing(const Template& head, const Template& tail) {
  std::vector<VoicingNote> out = head.voicing;
  const int offset = head.length_bars * kTemplateSlotsPerBar;
  for (auto v : tail.voicing) {
    v.onset_slot += offset;
    out.push_back(v);
  }
  return out;
}

/// Numerals of head ++ tail without recomputing from events.
std::vector<std::string> joinedRoman(const std::vector<std::string>& head, const std::vector<std::string>& tail,
                                     bool merge) {
  std::vector<std::string> out = head;
  out.insert(out.end(), tail.begin() + (merge ? 1 : 0), tail.end());
  return out;
}

/// Every uniform-style rendering whose numerals equal the chosen candidate's.
std::vector<Variant> collectVariants(const Library& lib, const Candidate& chosen, int bars, Mode mode) {
  const Key key{canonicalTonic(mode), mode};
  const auto target = toRoman(chosen.progression, key);
  std::map<std::string, Variant> by_id;

  std::vector<const Template*> quarters;
  std::unordered_map<const Template*, std::vector<std::string>> roman;
  for (const auto& t : lib.templates()) {
    if (t.mode != mode) continue;
    if (t.length_bars == bars) {
      if (toRoman(t.progression, key) == target) {
        by_id.emplace(t.id, Variant{t.id, t.style, t.progression, t.voicing});
      }
    }
    if (bars == 8 && t.length_bars == 4) {
      quarters.push_back(&t);
      roman.emplace(&t, toRoman(t.progression, key));
    }
  }
  for (const Template* a : quarters) {
    const auto& ra = roman[a];
    if (ra.size() > target.size() || !std::equal(ra.begin(), ra.end(), target.begin())) continue;
    for (const Template* b : quarters) {
      if (a->style != b->style) continue;
      const bool merge = a->progression.bar(-1).back() == b->progression[0];
      if (joinedRoman(ra, roman[b], merge) != target) continue;
      const std::string id = a->id + "+" + b->id;
      by_id.emplace(id, Variant{id, a->style, a->progression.concat(b->progression), concatVoicing(*a, *b)});
    }
  }

  // A mixed-style pair can only render itself; it is listed under its head's style.
  const std::string chosen_id = chosen.id();
  if (!by_id.count(chosen_id)) {
    std::vector<VoicingNote> voicing;
    if (chosen.concatenated) {
      voicing = concatVoicing(*lib.find(chosen.parts[0]), *lib.find(chosen.parts[1]));
    } else {
      voicing = lib.find(chosen_id)->voicing;
    }
    by_id.emplace(chosen_id, Variant{chosen_id, chosen.part_styles.front(), chosen.progression, std::move(voicing)});
  }

  std::vector<Variant> out;
  out.reserve(by_id.size());
  for (auto& [id, v] : by_id) out.push_back(std::move(v));
  return out;
}

struct PhraseScores {
  std::vector<double> micro;
  std::vector<double> meso;
  std::vector<double> local;
};

}  // namespace

void HarmonizerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DataError("beta must lie in [0, 1]");
  micro_table.validate();
}

std::vector<Candidate> generateCandidates(const Library& lib, int phrase_len_bars, Mode mode,
                                          const StyleFilter& filter, bool include_mismatched) {
  if (phrase_len_bars != 4 && phrase_len_bars != 8) {
    throw DataError("no candidates for phrase: templates cover 4 or 8 bars, phrase has " +
                    std::to_string(phrase_len_bars));
  }
  std::vector<Candidate> out;
  std::vector<const Template*> quarters;
  for (const auto& t : lib.templates()) {
    if (t.mode != mode || !passesFilter(t, filter)) continue;
    if (t.length_bars == phrase_len_bars || include_mismatched) out.push_back(plainCandidate(t));
    if (t.length_bars == 4) quarters.push_back(&t);
  }
  if (phrase_len_bars == 8) {
    for (const Template* a : quarters) {
      for (const Template* b : quarters) out.push_back(concatCandidate(*a, *b));
    }
  }
  if (out.empty()) throw DataError("no candidates for phrase");
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.id() < b.id(); });
  return out;
}

HarmonizationResult harmonize(const AnnotatedMelody& melody, const Library& lib, const TransitionStats& stats,
                              const HarmonizerConfig& config) {
  config.validate();
  melody.validate();

  const int shift = shiftToCanonical(melody.key);
  const AnnotatedMelody canon = melody.transposed(shift);
  const Key key = canon.key;
  const std::vector<int> pitches = canon.slotPitches();
  const std::size_t phrase_count = canon.phrases.size();

  std::map<int, std::vector<Candidate>> by_length;
  std::vector<const std::vector<Candidate>*> cands(phrase_count);
  std::vector<PhraseScores> scores(phrase_count);

  for (std::size_t i = 0; i < phrase_count; ++i) {
    const int slots = canon.phraseSlots(i);
    if (slots % kTemplateSlotsPerBar != 0) {
      throw DataError("no candidates for phrase " + std::to_string(i + 1) + ": " + std::to_string(slots) +
                      " slots is not a whole number of template bars");
    }
    const int bars = slots / kTemplateSlotsPerBar;
    auto it = by_length.find(bars);
    if (it == by_length.end()) {
      try {
        it = by_length
                 .emplace(bars, generateCandidates(lib, bars, key.mode, config.style_filter,
                                                   !config.prune_length_mismatch))
                 .first;
      } catch (const DataError& e) {
        throw DataError("phrase " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    cands[i] = &it->second;
    const auto& cs = it->second;

    const auto phrase_pitches =
        std::span<const int>(pitches).subspan(static_cast<std::size_t>(canon.phraseStartSlot(i)),
                                              static_cast<std::size_t>(slots));
    std::vector<kernels::ChordSpan> matched;
    std::vector<std::size_t> matched_index;
    auto& sc = scores[i];
    sc.micro.assign(cs.size(), 0.0);
    for (std::size_t s = 0; s < cs.size(); ++s) {
      const auto events = cs[s].progression.events();
      if (static_cast<int>(events.size()) == slots) {
        matched.push_back(events);
        matched_index.push_back(s);
      } else {
        // Length-penalized candidates are scored on their overlap with the phrase.
        const std::size_t n = std::min(events.size(), phrase_pitches.size());
        sc.micro[s] = microLoss(phrase_pitches.first(n), events.first(n), key, config.micro_table);
      }
    }
    const auto micro = kernels::microLosses(config.backend, phrase_pitches, matched, key, config.micro_table);
    for (std::size_t k = 0; k < matched_index.size(); ++k) sc.micro[matched_index[k]] = micro[k];

    sc.meso.resize(cs.size());
    sc.local.resize(cs.size());
    for (std::size_t s = 0; s < cs.size(); ++s) {
      sc.meso[s] = mesoLoss(cs[s], slots, stats);
      sc.local[s] = config.beta * (1.0 - sc.micro[s]) + (1.0 - config.beta) * (1.0 - sc.meso[s]);
    }
  }

  std::vector<kernels::Matrix> macro;
  for (std::size_t i = 1; i < phrase_count; ++i) {
    const auto& prev = *cands[i - 1];
    const auto& curr = *cands[i];
    std::unordered_map<std::string, std::size_t> last_ids;
    std::unordered_map<std::string, std::size_t> first_ids;
    std::vector<kernels::ChordSpan> last_bars;
    std::vector<kernels::ChordSpan> first_bars;
    std::vector<std::size_t> last_of(prev.size());
    std::vector<std::size_t> first_of(curr.size());
    for (std::size_t t = 0; t < prev.size(); ++t) {
      const auto bar = prev[t].progression.bar(-1);
      auto [it, fresh] = last_ids.emplace(windowKey(bar), last_bars.size());
      if (fresh) last_bars.push_back(bar);
      last_of[t] = it->second;
    }
    for (std::size_t s = 0; s < curr.size(); ++s) {
      const auto bar = curr[s].progression.bar(0);
      auto [it, fresh] = first_ids.emplace(windowKey(bar), first_bars.size());
      if (fresh) first_bars.push_back(bar);
      first_of[s] = it->second;
    }
    const auto junction = kernels::junctionLosses(config.backend, stats, last_bars, first_bars);
    kernels::Matrix m(prev.size(), curr.size());
    for (std::size_t t = 0; t < prev.size(); ++t) {
      for (std::size_t s = 0; s < curr.size(); ++s) m(t, s) = junction(last_of[t], first_of[s]);
    }
    macro.push_back(std::move(m));
  }

  std::vector<std::vector<double>> local;
  local.reserve(phrase_count);
  for (const auto& sc : scores) local.push_back(sc.local);
  const auto solution = kernels::solveChain(local, macro, config.alpha, config.backend);

  HarmonizationResult result;
  result.total_score = solution.total;
  result.config_used = config;
  result.key = melody.key;
  result.meter = melody.meter;
  result.render_shift = -shift;
  for (std::size_t i = 0; i < phrase_count; ++i) {
    const auto s = static_cast<std::size_t>(solution.path[i]);
    PhraseChoice pc;
    pc.phrase_index = static_cast<int>(i);
    pc.phrase = canon.phrases[i];
    pc.chosen = (*cands[i])[s];
    pc.identity = joinRoman(toRoman(pc.chosen.progression, key));
    pc.losses.micro = scores[i].micro[s];
    pc.losses.meso = scores[i].meso[s];
    pc.losses.macro =
        i == 0 ? 0.0 : macro[i - 1](static_cast<std::size_t>(solution.path[i - 1]), s);
    pc.prefix_score = solution.prefix_scores[i];
    pc.variants = collectVariants(lib, pc.chosen, pc.chosen.length_bars, key.mode);
    const std::string chosen_id = pc.chosen.id();
    for (std::size_t v = 0; v < pc.variants.size(); ++v) {
      if (pc.variants[v].id == chosen_id) pc.selected = v;
    }
    result.choices.push_back(std::move(pc));
  }
  return result;
}

int HarmonizationResult::totalSlots() const {
  int total = 0;
  for (const auto& c : choices) total += static_cast<int>(c.rendering().progression.slots());
  return total;
}

int HarmonizationResult::phraseStartSlot(std::size_t phrase) const {
  int start = 0;
  for (std::size_t i = 0; i < phrase; ++i) start += static_cast<int>(choices[i].rendering().progression.slots());
  return start;
}

ChordProgression HarmonizationResult::phraseChords(std::size_t phrase) const {
  return choices[phrase].rendering().progression.transposed(render_shift);
}

std::vector<ChordEvent> HarmonizationResult::chords() const {
  std::vector<ChordEvent> out;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const auto p = phraseChords(i);
    out.insert(out.end(), p.events().begin(), p.events().end());
  }
  return out;
}

std::vector<VoicingNote> HarmonizationResult::voicing() const {
  std::vector<VoicingNote> out;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const int start = phraseStartSlot(i);
    for (auto v : choices[i].rendering().voicing) {
      v.onset_slot += start;
      v.pitch = std::clamp(v.pitch + render_shift, 0, 127);
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StyleLabel> availableStyles(const PhraseChoice& choice) {
  std::vector<StyleLabel> out;
  for (StyleLabel s : kAllStyles) {
    if (std::any_of(choice.variants.begin(), choice.variants.end(), [s](const Variant& v) { return v.style == s; })) {
      out.push_back(s);
    }
  }
  return out;
}

HarmonizationResult selectStyle(const HarmonizationResult& result, std::size_t phrase_index, StyleLabel style) {
  if (phrase_index >= result.choices.size()) {
    throw PreconditionError("phrase index " + std::to_string(phrase_index) + " out of range");
  }
  HarmonizationResult out = result;
  auto& choice = out.choices[phrase_index];
  if (choice.rendering().style == style) return out;
  for (std::size_t v = 0; v < choice.variants.size(); ++v) {
    if (choice.variants[v].style == style) {
      choice.selected = v;
      return out;
    }
  }
  std::string available;
  for (StyleLabel s : availableStyles(choice)) {
    if (!available.empty()) available += ", ";
    available += styleName(s);
  }
  throw DataError("phrase " + std::to_string(phrase_index + 1) + " has no " + std::string(styleName(style)) +
                  " variant; available: " + available);
}

nlohmann::json resultToJson(const HarmonizationResult& result) {
  using nlohmann::json;
  json phrases = json::array();
  for (const auto& c : result.choices) {
    json variants = json::array();
    for (const auto& v : c.variants) variants.push_back({{"id", v.id}, {"style", styleName(v.style)}});
    json styles = json::array();
    for (StyleLabel s : availableStyles(c)) styles.push_back(styleName(s));
    phrases.push_back({
        {"index", c.phrase_index},
        {"label", std::string(1, c.phrase.label)},
        {"length_bars", c.phrase.length_bars},
        {"start_bar", c.phrase.start_bar},
        {"identity", c.identity},
        {"template_ids", c.chosen.parts},
        {"concatenated", c.chosen.concatenated},
        {"rendered_id", c.rendering().id},
        {"rendered_style", styleName(c.rendering().style)},
        {"variants", std::move(variants)},
        {"available_styles", std::move(styles)},
        {"losses", {{"micro", c.losses.micro}, {"meso", c.losses.meso}, {"macro", c.losses.macro}}},
        {"score", c.prefix_score},
    });
  }
  json chords = json::array();
  for (const auto& e : result.chords()) {
    chords.push_back({e.root.value(), e.quality == TriadQuality::Major ? "maj" : "min"});
  }
  json filter = nullptr;
  if (result.config_used.style_filter) {
    filter = json::array();
    for (StyleLabel s : *result.config_used.style_filter) filter.push_back(styleName(s));
  }
  return {
      {"key", keyName(result.key)},
      {"meter", std::to_string(result.meter.numerator) + "/" + std::to_string(result.meter.denominator)},
      {"alpha", result.config_used.alpha},
      {"beta", result.config_used.beta},
      {"style_filter", filter},
      {"total_score", result.total_score},
      {"phrases", std::move(phrases)},
      {"chords", std::move(chords)},
  };
}

}  // namespace accord
