/**
 * @file library.hpp
 * @brief Chord-progression template library and corpus transition statistics.
 *
 * A library file is line-delimited JSON, one template per line:
 *
 *   {"id": "...", "style": "pop_standard", "mode": "major", "length_bars": 4,
 *    "chords": [[0, "maj"], ...one per slot], "voicing": [[onset, dur, pitch, vel], ...],
 *    "source": "..."}
 *
 * Progressions are stored in the canonical key (C major or A minor).
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "accord/core.hpp"

namespace accord {

enum class StyleLabel : std::uint8_t { PopStandard, PopComplex, Dark, RnB, Unknown };

inline constexpr StyleLabel kAllStyles[] = {StyleLabel::PopStandard, StyleLabel::PopComplex,
                                            StyleLabel::Dark, StyleLabel::RnB,
                                            StyleLabel::Unknown};

/// pop_standard | pop_complex | dark | rnb | unknown
std::string_view styleName(StyleLabel style);
/// Inverse of styleName; also accepts dashes and mixed case. @throws DataError
StyleLabel parseStyle(std::string_view text);

struct Template {
  std::string id;
  ChordProgression progression;
  std::vector<VoicingNote> voicing;
  StyleLabel style = StyleLabel::Unknown;
  Mode mode = Mode::Major;
  int length_bars = 4;
  std::string source;

  Key canonicalKey() const { return Key{canonicalTonic(mode), mode}; }
  /// @throws DataError naming the broken invariant.
  void validate() const;
};

class Library {
 public:
  Library() = default;
  /// @throws DataError on duplicate ids or dedup signatures, or an empty set.
  explicit Library(std::vector<Template> templates);

  std::span<const Template> templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }
  const Template* find(std::string_view id) const;

 private:
  std::vector<Template> templates_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Transposition-invariant key: mode, length, root motion relative to the
/// first root, and the quality sequence.
std::string dedupSignature(const Template& t);
std::string dedupSignature(const ChordProgression& progression, Mode mode);

std::string templateToJsonLine(const Template& t);
/// @throws DataError with the offending field name.
Template templateFromJsonLine(std::string_view line);

/// @throws IoError, DataError ("line N: ...", "empty library").
Library loadLibrary(const std::filesystem::path& path);
void saveLibrary(const Library& lib, const std::filesystem::path& path);

/// Counts of two-bar (16-slot) chord windows over a library.
class TransitionStats {
 public:
  TransitionStats() = default;
  TransitionStats(std::unordered_map<std::string, long> counts, std::size_t library_size)
      : counts_(std::move(counts)), n_(library_size) {}

  long count(std::span<const ChordEvent> last_bar, std::span<const ChordEvent> first_bar) const;
  std::size_t librarySize() const { return n_; }
  const std::unordered_map<std::string, long>& counts() const { return counts_; }

 private:
  std::unordered_map<std::string, long> counts_;
  std::size_t n_ = 0;
};

/// Compact key for a run of chord events (one byte per slot).
std::string windowKey(std::span<const ChordEvent> events);

/// 2-bar window, 1-bar stride, over every template.
TransitionStats buildTransitionStats(const Library& lib);

/// 1 + log_N(1/c), with c = 0 smoothed to 1/N and the result clamped to [0, 2].
/// @throws PreconditionError when N < 2.
double transitionLoss(const TransitionStats& stats, std::span<const ChordEvent> last_bar,
                      std::span<const ChordEvent> first_bar);
/// The same loss from a raw count.
double transitionLossFromCount(long count, std::size_t library_size);

}  // namespace accord
