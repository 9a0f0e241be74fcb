/**
 * @file curation.hpp
 * @brief Build a template library from a directory of chord-track MIDI files.
 *
 * Passes, in order:
 *  1. reject melody-like or rhythmically busy files;
 *  2. map the raw style label (the file's parent directory name) through a style map;
 *  3. transpose to C major / A minor and drop transposed duplicates.
 *
 * Style-map file, one mapping per line, '#' starts a comment:
 *
 *   ballad = pop_standard
 *   jazz-pop = pop_complex
 */
#pragma once

#include <filesystem>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "accord/library.hpp"
#include "accord/smf.hpp"

namespace accord {

class StyleMap {
 public:
  StyleMap() = default;
  explicit StyleMap(std::map<std::string, StyleLabel> entries);

  /// Unmapped labels give Unknown. Matching is case-insensitive.
  StyleLabel lookup(std::string_view raw) const;
  bool contains(std::string_view raw) const;
  const std::map<std::string, StyleLabel>& entries() const { return entries_; }

 private:
  std::map<std::string, StyleLabel> entries_;
};

/// @throws DataError ("line N: ...")
StyleMap parseStyleMap(std::string_view text);
/// @throws IoError, DataError
StyleMap loadStyleMap(const std::filesystem::path& path);

struct CurationConfig {
  /// Reject when more than this fraction of sounding slots hold fewer than `thin_note_count` notes.
  double thin_slot_fraction = 0.4;
  int thin_note_count = 3;
  /// Reject when the inter-onset-interval entropy (bits) exceeds this.
  double ioi_entropy_threshold = 2.5;
};

struct CurationReport {
  int files_scanned = 0;
  int unreadable = 0;
  int rejected_melody = 0;
  int rejected_rhythm = 0;
  int rejected_length = 0;
  int style_mapped = 0;
  int style_unknown = 0;
  int duplicates_removed = 0;
  int kept = 0;
  std::map<StyleLabel, int> kept_by_style;
  std::vector<std::string> warnings;

  std::string text() const;
};

struct CurationResult {
  Library library;
  CurationReport report;
};

/// Per-slot analysis of one chord file, exposed for tests.
struct ChordTrackAnalysis {
  int slots = 0;
  std::vector<int> polyphony;  ///< sounding notes per slot
  std::vector<std::vector<int>> sounding;  ///< MIDI pitches per slot
  std::vector<int> onset_slots;  ///< distinct, ascending
  std::array<double, 12> pc_weight{};  ///< duration-weighted pitch-class histogram
};

ChordTrackAnalysis analyzeChordTrack(std::span<const VoicingNote> notes);

/// Fraction of sounding slots with fewer than `min_notes` notes (0 when nothing sounds).
double thinSlotFraction(const ChordTrackAnalysis& a, int min_notes);
/// Shannon entropy (bits) of the distribution of gaps between consecutive onsets.
double ioiEntropy(const ChordTrackAnalysis& a);

/// Best of the 24 keys by correlation with the Krumhansl-Kessler profiles; ties go to major.
Key detectKey(const std::array<double, 12>& pc_weight);

/// Triad for a set of sounding pitches; power chords take the quality from `mode`.
std::optional<ChordEvent> detectChord(std::span<const int> pitches, Mode mode);

/// Key signature meta event of the file, if any.
std::optional<Key> keySignature(const smf::MidiFile& file);

/// @throws DataError when no file survives; unreadable files only warn.
CurationResult curate(const std::filesystem::path& midi_dir, const StyleMap& style_map,
                      const CurationConfig& config = {});

/// One template as a single-track MIDI file carrying its key signature.
smf::MidiFile templateToMidi(const Template& t, int ticks_per_quarter = 480);

}  // namespace accord
