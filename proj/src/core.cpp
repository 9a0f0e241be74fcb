/**
 * @file core.cpp
 * @brief Core domain types and diatonic theory helpers.
 */
#include "accord/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "accord/error.hpp"

namespace accord {

namespace {

constexpr std::array<int, 7> kMajorSteps = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinorSteps = {0, 2, 3, 5, 7, 8, 10};

// Numeral spelling for every interval above the tonic. Non-diatonic roots
// borrow the neighbouring degree with an accidental.
constexpr std::array<std::string_view, 12> kMajorNumerals = {
    "I", "bII", "II", "bIII", "III", "IV", "#IV", "V", "bVI", "VI", "bVII", "VII"};
constexpr std::array<std::string_view, 12> kMinorNumerals = {
    "I", "bII", "II", "III", "#III", "IV", "#IV", "V", "VI", "#VI", "VII", "#VII"};

constexpr std::array<std::string_view, 12> kPcNames = {"C",  "C#", "D",  "Eb", "E",  "F",
                                                       "F#", "G",  "Ab", "A",  "Bb", "B"};

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

ChordProgression::ChordProgression(std::vector<ChordEvent> events) : events_(std::move(events)) {
  if (events_.empty() || events_.size() % kTemplateSlotsPerBar != 0) {
    throw DataError("chord progression length " + std::to_string(events_.size()) +
                    " is not a positive multiple of 8 slots");
  }
}

std::span<const ChordEvent> ChordProgression::bar(int index) const {
  const int n = bars();
  if (index < 0) index += n;
  if (index < 0 || index >= n) throw PreconditionError("bar index out of range");
  return std::span<const ChordEvent>(events_).subspan(
      static_cast<std::size_t>(index) * kTemplateSlotsPerBar, kTemplateSlotsPerBar);
}

ChordProgression ChordProgression::transposed(int semitones) const {
  std::vector<ChordEvent> out = events_;
  for (auto& e : out) e.root = e.root.shifted(semitones);
  return ChordProgression(std::move(out));
}

ChordProgression ChordProgression::concat(const ChordProgression& tail) const {
  std::vector<ChordEvent> out = events_;
  out.insert(out.end(), tail.events_.begin(), tail.events_.end());
  return ChordProgression(std::move(out));
}

int AnnotatedMelody::totalBars() const {
  int bars = 0;
  for (const auto& p : phrases) bars += p.length_bars;
  return bars;
}

std::vector<int> AnnotatedMelody::slotPitches() const {
  std::vector<int> out(static_cast<std::size_t>(totalSlots()), -1);
  for (const auto& n : notes) {
    for (int s = n.onset_slot; s < n.endSlot() && s < static_cast<int>(out.size()); ++s) {
      out[static_cast<std::size_t>(s)] = n.pitch;
    }
  }
  return out;
}

void AnnotatedMelody::validate() const {
  if (!(meter == Meter{4, 4} || meter == Meter{2, 4})) {
    throw DataError("meter must be 4/4 or 2/4");
  }
  if (phrases.empty()) throw DataError("melody has no phrases");
  int expected_start = 0;
  for (const auto& p : phrases) {
    if (p.length_bars != 4 && p.length_bars != 8) {
      throw DataError(std::string("phrase ") + p.label + " has length " +
                      std::to_string(p.length_bars) + " (must be 4 or 8 bars)");
    }
    if (p.start_bar != expected_start) throw DataError("phrases do not tile the melody contiguously");
    expected_start += p.length_bars;
  }
  const int total = totalSlots();
  int prev_end = 0;
  for (const auto& n : notes) {
    if (n.onset_slot < 0 || n.duration_slots < 1) throw DataError("melody note with bad timing");
    if (n.pitch < 0 || n.pitch > 127) throw DataError("melody pitch out of range");
    if (n.onset_slot < prev_end) throw DataError("melody notes overlap or are unsorted");
    if (n.endSlot() > total) throw DataError("melody note extends past the last phrase");
    prev_end = n.endSlot();
  }
}

AnnotatedMelody AnnotatedMelody::transposed(int semitones) const {
  AnnotatedMelody out = *this;
  for (auto& n : out.notes) n.pitch += semitones;
  out.key = accord::transposed(key, semitones);
  return out;
}

int intervalPc(PitchClass a, PitchClass b) { return PitchClass(b.value() - a.value()).value(); }

std::span<const int, 7> scaleSteps(Mode mode) {
  return mode == Mode::Major ? std::span<const int, 7>(kMajorSteps)
                             : std::span<const int, 7>(kMinorSteps);
}

bool isDiatonic(PitchClass pc, const Key& key) {
  const auto steps = scaleSteps(key.mode);
  return std::find(steps.begin(), steps.end(), intervalPc(key.tonic, pc)) != steps.end();
}

std::optional<int> chordDegree(const ChordEvent& chord, const Key& key) {
  const auto steps = scaleSteps(key.mode);
  const int iv = intervalPc(key.tonic, chord.root);
  for (int d = 0; d < 7; ++d) {
    if (steps[static_cast<std::size_t>(d)] == iv) return d + 1;
  }
  return std::nullopt;
}

std::vector<std::string> toRoman(const ChordProgression& progression, const Key& key) {
  const auto& table = key.mode == Mode::Major ? kMajorNumerals : kMinorNumerals;
  std::vector<std::string> out;
  const ChordEvent* prev = nullptr;
  for (const auto& e : progression.events()) {
    if (prev != nullptr && *prev == e) continue;
    prev = &e;
    std::string numeral(table[static_cast<std::size_t>(intervalPc(key.tonic, e.root))]);
    if (e.quality == TriadQuality::Minor) {
      std::transform(numeral.begin(), numeral.end(), numeral.begin(), [](unsigned char c) {
        return c == 'I' || c == 'V' ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
      });
    }
    out.push_back(std::move(numeral));
  }
  return out;
}

std::string joinRoman(const std::vector<std::string>& numerals) {
  std::string out;
  for (std::size_t i = 0; i < numerals.size(); ++i) {
    if (i) out += '-';
    out += numerals[i];
  }
  return out;
}

PitchClass canonicalTonic(Mode mode) { return PitchClass(mode == Mode::Major ? 0 : 9); }

int nearestShift(PitchClass from, PitchClass to) {
  int s = intervalPc(from, to);
  return s > 5 ? s - 12 : s;
}

int shiftToCanonical(const Key& key) { return nearestShift(key.tonic, canonicalTonic(key.mode)); }

Key transposed(const Key& key, int semitones) { return Key{key.tonic.shifted(semitones), key.mode}; }

std::string pitchClassName(PitchClass pc) { return std::string(kPcNames[static_cast<std::size_t>(pc.value())]); }

PitchClass parsePitchClassName(std::string_view name) {
  static constexpr std::array<int, 7> kLetters = {9, 11, 0, 2, 4, 5, 7};  // A..G
  if (name.empty()) throw DataError("empty pitch name");
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  if (letter < 'A' || letter > 'G') throw DataError("bad pitch name '" + std::string(name) + "'");
  int pc = kLetters[static_cast<std::size_t>(letter - 'A')];
  for (char c : name.substr(1)) {
    if (c == '#') {
      ++pc;
    } else if (c == 'b') {
      --pc;
    } else {
      throw DataError("bad pitch name '" + std::string(name) + "'");
    }
  }
  return PitchClass(pc);
}

std::string_view modeName(Mode mode) { return mode == Mode::Major ? "major" : "minor"; }

Mode parseMode(std::string_view text) {
  const std::string t = lowered(text);
  if (t == "major" || t == "maj") return Mode::Major;
  if (t == "minor" || t == "min") return Mode::Minor;
  throw DataError("mode must be major or minor, got '" + std::string(text) + "'");
}

std::string keyName(const Key& key) { return pitchClassName(key.tonic) + " " + std::string(modeName(key.mode)); }

}  // namespace accord
