/**
 * @file core.hpp
 * @brief Domain types and elementary music theory shared by every module.
 *
 * Time is measured in 8th-note slots throughout: one 4/4 bar is 8 slots,
 * one 2/4 bar is 4. Chords are reduced to root + major/minor triad quality
 * for matching; full voicings are carried separately as VoicingNote lists.
 */
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace accord {

/// Slots in one bar of a chord template (templates are always 4/4).
inline constexpr int kTemplateSlotsPerBar = 8;

/// Semitone class 0-11, C = 0. Construction wraps any integer into range.
class PitchClass {
 public:
  constexpr PitchClass() = default;
  constexpr explicit PitchClass(int semitones) : value_(((semitones % 12) + 12) % 12) {}

  constexpr int value() const { return value_; }
  constexpr PitchClass shifted(int semitones) const { return PitchClass(value_ + semitones); }

  constexpr auto operator<=>(const PitchClass&) const = default;

 private:
  int value_ = 0;
};

enum class Mode : std::uint8_t { Major, Minor };
enum class TriadQuality : std::uint8_t { Major, Minor };

struct Key {
  PitchClass tonic;
  Mode mode = Mode::Major;

  bool operator==(const Key&) const = default;
};

struct ChordEvent {
  PitchClass root;
  TriadQuality quality = TriadQuality::Major;

  bool operator==(const ChordEvent&) const = default;
};

/// Chord sequence sampled on the 8th-note grid, one event per slot.
/// Length is always a positive multiple of one bar (8 slots).
class ChordProgression {
 public:
  ChordProgression() = default;
  /// @throws DataError when the length is not a positive multiple of 8.
  explicit ChordProgression(std::vector<ChordEvent> events);

  std::span<const ChordEvent> events() const { return events_; }
  std::size_t slots() const { return events_.size(); }
  int bars() const { return static_cast<int>(events_.size()) / kTemplateSlotsPerBar; }
  bool empty() const { return events_.empty(); }
  const ChordEvent& operator[](std::size_t slot) const { return events_[slot]; }

  /// The 8 events of bar `index` (negative counts from the end).
  std::span<const ChordEvent> bar(int index) const;
  ChordProgression transposed(int semitones) const;
  ChordProgression concat(const ChordProgression& tail) const;

  bool operator==(const ChordProgression&) const = default;

 private:
  std::vector<ChordEvent> events_;
};

struct MelodyNote {
  int onset_slot = 0;
  int duration_slots = 1;
  int pitch = 60;

  int endSlot() const { return onset_slot + duration_slots; }
  bool operator==(const MelodyNote&) const = default;
};

struct Phrase {
  char label = 'A';
  int length_bars = 8;
  int start_bar = 0;

  bool operator==(const Phrase&) const = default;
};

struct Meter {
  int numerator = 4;
  int denominator = 4;

  int slotsPerBar() const { return numerator * 8 / denominator; }
  bool operator==(const Meter&) const = default;
};

struct VoicingNote {
  int onset_slot = 0;
  int duration_slots = 1;
  int pitch = 60;
  int velocity = 80;

  int endSlot() const { return onset_slot + duration_slots; }
  bool operator==(const VoicingNote&) const = default;
  auto operator<=>(const VoicingNote&) const = default;
};

/// Monophonic melody with phrase annotation, key and meter.
struct AnnotatedMelody {
  std::vector<MelodyNote> notes;
  std::vector<Phrase> phrases;
  Key key;
  Meter meter;

  int slotsPerBar() const { return meter.slotsPerBar(); }
  int totalBars() const;
  int totalSlots() const { return totalBars() * slotsPerBar(); }
  int phraseStartSlot(std::size_t phrase) const { return phrases[phrase].start_bar * slotsPerBar(); }
  int phraseSlots(std::size_t phrase) const { return phrases[phrase].length_bars * slotsPerBar(); }

  /// Sounding MIDI pitch per slot over the whole melody, -1 for rests.
  std::vector<int> slotPitches() const;

  /// @throws DataError on any broken invariant (tiling, meter, overlap, range).
  void validate() const;

  AnnotatedMelody transposed(int semitones) const;
};

// --- elementary theory -------------------------------------------------------

/// (b - a) mod 12.
int intervalPc(PitchClass a, PitchClass b);

/// Semitone offsets of the seven diatonic degrees (natural minor for Minor).
std::span<const int, 7> scaleSteps(Mode mode);

bool isDiatonic(PitchClass pc, const Key& key);

/// Scale degree 1-7 of the chord root, or nullopt for non-diatonic roots.
std::optional<int> chordDegree(const ChordEvent& chord, const Key& key);

/// One numeral per run of identical consecutive events, e.g. {"I","vi","ii","V"}.
std::vector<std::string> toRoman(const ChordProgression& progression, const Key& key);
std::string joinRoman(const std::vector<std::string>& numerals);

/// Tonic of the canonical key for a mode: C major or A minor.
PitchClass canonicalTonic(Mode mode);
/// Pitch shift in [-6, 5] that moves `key` onto its canonical key.
int shiftToCanonical(const Key& key);
/// Pitch shift in [-6, 5] that moves pitch class `from` onto `to`.
int nearestShift(PitchClass from, PitchClass to);

Key transposed(const Key& key, int semitones);

std::string pitchClassName(PitchClass pc);
/// Accepts C, C#, Db, ... (case-insensitive letter). @throws DataError
PitchClass parsePitchClassName(std::string_view name);
std::string_view modeName(Mode mode);
/// "major" | "minor" (case-insensitive). @throws DataError
Mode parseMode(std::string_view text);
std::string keyName(const Key& key);

}  // namespace accord
