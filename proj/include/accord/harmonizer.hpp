/**
 * @file harmonizer.hpp
 * @brief Phrase-level template matching by dynamic programming.
 *
 * For each phrase the candidates are library templates of the phrase length
 * plus ordered pairs of 4-bar templates for 8-bar phrases. Each candidate s
 * of phrase i gets the recurrence value
 *
 *   S(i, s) = beta (1 - Lmic) + (1 - beta) (1 - Lmes) + max_t { S(i-1, t) + alpha (1 - Lmac(t -> s)) }
 *
 * with no max term for the first phrase. The best final S is the total score.
 * All scoring happens in the canonical key; results are transposed back.
 */
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "accord/core.hpp"
#include "accord/kernels.hpp"
#include "accord/library.hpp"
#include "accord/loss.hpp"
#include "accord/micro_table.hpp"

namespace accord {

using StyleFilter = std::optional<std::set<StyleLabel>>;

struct HarmonizerConfig {
  double alpha = 0.1;
  double beta = 0.5;
  StyleFilter style_filter;
  MicroLossTable micro_table = consonanceRankTable();
  /// Drop length-mismatched candidates instead of carrying the e^10 - 1 penalty.
  bool prune_length_mismatch = true;
  kernels::Backend backend = kernels::Backend::Parallel;

  /// @throws DataError when alpha or beta leave [0, 1].
  void validate() const;
};

/// A rendering option for a phrase: same numerals, possibly different style.
struct Variant {
  std::string id;
  StyleLabel style = StyleLabel::Unknown;
  ChordProgression progression;     ///< canonical key
  std::vector<VoicingNote> voicing;  ///< canonical key, phrase-relative slots
};

struct PhraseLosses {
  double micro = 0.0;
  double meso = 0.0;
  double macro = 0.0;
};

struct PhraseChoice {
  int phrase_index = 0;
  Phrase phrase;
  Candidate chosen;
  std::string identity;  ///< numerals joined by '-', canonical key
  std::vector<Variant> variants;
  std::size_t selected = 0;  ///< index into variants used for rendering
  PhraseLosses losses;
  double prefix_score = 0.0;  ///< S(i, chosen)

  const Variant& rendering() const { return variants[selected]; }
};

struct HarmonizationResult {
  std::vector<PhraseChoice> choices;
  double total_score = 0.0;
  HarmonizerConfig config_used;
  Key key;           ///< key of the input melody
  Meter meter;
  int render_shift = 0;  ///< semitones from canonical key to `key`

  int totalSlots() const;
  int phraseStartSlot(std::size_t phrase) const;
  /// Rendered chord per slot, in the input key.
  std::vector<ChordEvent> chords() const;
  /// Chord events of one phrase, in the input key.
  ChordProgression phraseChords(std::size_t phrase) const;
  /// Template voicings of the rendered variants, absolute slots, input key.
  std::vector<VoicingNote> voicing() const;
};

/// Candidates of the given length (template bars) for one mode, sorted by id.
/// With `include_mismatched`, templates of other lengths are kept as plain
/// candidates (they then carry the length penalty).
/// @throws DataError "no candidates for phrase" when the set is empty.
std::vector<Candidate> generateCandidates(const Library& lib, int phrase_len_bars, Mode mode,
                                          const StyleFilter& filter, bool include_mismatched = false);

/// @throws DataError, PreconditionError
HarmonizationResult harmonize(const AnnotatedMelody& melody, const Library& lib, const TransitionStats& stats,
                              const HarmonizerConfig& config);

/// Re-render one phrase with a variant of the given style. Identity and every
/// other phrase are untouched.
/// @throws DataError listing the available styles; PreconditionError on a bad index.
HarmonizationResult selectStyle(const HarmonizationResult& result, std::size_t phrase_index, StyleLabel style);

/// Styles available for a phrase, in enum order.
std::vector<StyleLabel> availableStyles(const PhraseChoice& choice);

nlohmann::json resultToJson(const HarmonizationResult& result);

}  // namespace accord
