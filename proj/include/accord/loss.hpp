/**
 * @file loss.hpp
 * @brief Harmonization candidates and the three per-phrase loss terms.
 *
 *  - micro: mean note-wise dissonance of the melody against the candidate chords;
 *  - meso: junction penalty for concatenated candidates plus the length penalty
 *    (1/delta2 - 1, delta2 = e^-10 on length mismatch);
 *  - macro: junction penalty between consecutive phrases (0 for the first).
 */
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "accord/core.hpp"
#include "accord/library.hpp"
#include "accord/micro_table.hpp"

namespace accord {

/// delta2 for a candidate whose length differs from the phrase.
inline const double kLengthMismatchDelta = std::exp(-10.0);

/// One template, or two 4-bar templates played back to back.
struct Candidate {
  std::vector<std::string> parts;
  std::vector<StyleLabel> part_styles;
  ChordProgression progression;
  bool concatenated = false;
  int length_bars = 0;
  /// Bars contributed by the first part; the junction is at this bar.
  int split_bar = 0;

  std::string id() const;
  /// Style shared by every part, if any.
  std::optional<StyleLabel> uniformStyle() const;
};

Candidate plainCandidate(const Template& t);
Candidate concatCandidate(const Template& head, const Template& tail);

/// Mean table lookup over sounding slots; 0.5 for an all-rest phrase.
/// `phrase_pitches` holds one MIDI pitch per slot (-1 = rest).
/// @throws PreconditionError on a length mismatch.
double microLoss(std::span<const int> phrase_pitches, std::span<const ChordEvent> chords,
                 const Key& key, const MicroLossTable& table);

/// delta1 * T(junction) + (1/delta2 - 1).
double mesoLoss(const Candidate& candidate, int phrase_slots, const TransitionStats& stats);

/// 0 when prev is absent, else T(last bar of prev -> first bar of curr).
double macroLoss(const Candidate* prev, const Candidate& curr, const TransitionStats& stats);

}  // namespace accord
