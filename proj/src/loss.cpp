/**
 * @file loss.cpp
 * @brief Candidate construction and the micro/meso/macro loss terms.
 */
#include "accord/loss.hpp"

#include "accord/error.hpp"

namespace accord {

std::string Candidate::id() const {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '+';
    out += parts[i];
  }
  return out;
}

std::optional<StyleLabel> Candidate::uniformStyle() const {
  if (part_styles.empty()) return std::nullopt;
  for (StyleLabel s : part_styles) {
    if (s != part_styles.front()) return std::nullopt;
  }
  return part_styles.front();
}

Candidate plainCandidate(const Template& t) {
  Candidate c;
  c.parts = {t.id};
  c.part_styles = {t.style};
  c.progression = t.progression;
  c.length_bars = t.length_bars;
  c.split_bar = t.length_bars;
  return c;
}

Candidate concatCandidate(const Template& head, const Template& tail) {
  Candidate c;
  c.parts = {head.id, tail.id};
  c.part_styles = {head.style, tail.style};
  c.progression = head.progression.concat(tail.progression);
  c.concatenated = true;
  c.length_bars = head.length_bars + tail.length_bars;
  c.split_bar = head.length_bars;
  return c;
}

double microLoss(std::span<const int> phrase_pitches, std::span<const ChordEvent> chords,
                 const Key& key, const MicroLossTable& table) {
  if (phrase_pitches.size() != chords.size()) {
    throw PreconditionError("micro loss: melody covers " + std::to_string(phrase_pitches.size()) +
                            " slots but the progression covers " + std::to_string(chords.size()));
  }
  double sum = 0.0;
  int sounding = 0;
  for (std::size_t s = 0; s < chords.size(); ++s) {
    const int pitch = phrase_pitches[s];
    if (pitch < 0) continue;
    ++sounding;
    const auto degree = chordDegree(chords[s], key);
    sum += degree ? table.at(key.mode, *degree, intervalPc(key.tonic, PitchClass(pitch)))
                  : table.non_diatonic_penalty;
  }
  return sounding == 0 ? 0.5 : sum / sounding;
}

double mesoLoss(const Candidate& candidate, int phrase_slots, const TransitionStats& stats) {
  double junction = 0.0;
  if (candidate.concatenated) {
    junction = transitionLoss(stats, candidate.progression.bar(candidate.split_bar - 1),
                              candidate.progression.bar(candidate.split_bar));
  }
  const bool same_length = static_cast<int>(candidate.progression.slots()) == phrase_slots;
  const double delta2 = same_length ? 1.0 : kLengthMismatchDelta;
  return junction + (1.0 / delta2 - 1.0);
}

double macroLoss(const Candidate* prev, const Candidate& curr, const TransitionStats& stats) {
  if (prev == nullptr) return 0.0;
  return transitionLoss(stats, prev->progression.bar(-1), curr.progression.bar(0));
}

}  // namespace accord
