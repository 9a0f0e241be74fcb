/**
 * @file midi_io.cpp
 * @brief Melody import and two-track export on the 8th-note grid.
 */
#include "accord/midi_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "accord/error.hpp"

namespace accord {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double meanPitch(const std::vector<smf::NoteSpan>& notes) {
  double sum = 0.0;
  for (const auto& n : notes) sum += n.pitch;
  return notes.empty() ? -1.0 : sum / static_cast<double>(notes.size());
}

void appendNotes(std::vector<smf::MidiEvent>& events, std::uint32_t ticks_per_slot, int channel, int slot,
                 int duration, int pitch, int velocity) {
  const auto on = static_cast<std::uint32_t>(slot) * ticks_per_slot;
  const auto off = static_cast<std::uint32_t>(slot + duration) * ticks_per_slot;
  events.push_back(smf::noteOn(on, channel, pitch, velocity));
  events.push_back(smf::noteOff(off, channel, pitch));
}

/// Offs before ons at the same tick, then by pitch.
void sortEvents(std::vector<smf::MidiEvent>& events, std::size_t first_note) {
  std::stable_sort(events.begin() + static_cast<std::ptrdiff_t>(first_note), events.end(),
                   [](const smf::MidiEvent& a, const smf::MidiEvent& b) {
                     if (a.tick != b.tick) return a.tick < b.tick;
                     const bool a_off = a.isNoteOff();
                     const bool b_off = b.isNoteOff();
                     if (a_off != b_off) return a_off;
                     return a.data[0] < b.data[0];
                   });
}

}  // namespace

std::vector<Phrase> parsePhraseString(std::string_view text) {
  if (text.empty()) throw DataError("phrase string is empty");
  std::vector<Phrase> out;
  int bar = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char label = text[i];
    if (!std::isalpha(static_cast<unsigned char>(label))) {
      throw DataError("phrase string: expected a letter at position " + std::to_string(i + 1));
    }
    ++i;
    const std::size_t digits = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == digits) throw DataError("phrase string: expected digits at position " + std::to_string(i + 1));
    const int length = std::stoi(std::string(text.substr(digits, i - digits)));
    if (length != 4 && length != 8) {
      throw DataError("phrase string: length " + std::to_string(length) + " at position " +
                      std::to_string(digits + 1) + " must be 4 or 8");
    }
    out.push_back({static_cast<char>(std::toupper(static_cast<unsigned char>(label))), length, bar});
    bar += length;
  }
  return out;
}

Meter parseMeter(std::string_view text) {
  const std::string t = trim(text);
  if (t == "4/4") return {4, 4};
  if (t == "2/4") return {2, 4};
  throw DataError("meter must be 4/4 or 2/4, got '" + t + "'");
}

Key parseKey(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tonic;
  std::string mode;
  in >> tonic >> mode;
  if (tonic.empty()) throw DataError("key is empty");
  Key key;
  key.tonic = parsePitchClassName(tonic);
  key.mode = mode.empty() ? Mode::Major : parseMode(mode);
  return key;
}

AnnotationSidecar parseSidecar(std::string_view text) {
  AnnotationSidecar ann;
  bool have_phrases = false;
  bool have_key = false;
  std::string mode_override;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto sep = t.find_first_of(":=");
    if (sep == std::string::npos) throw DataError("annotation line without ':' or '=': " + t);
    const std::string field = lower(trim(std::string_view(t).substr(0, sep)));
    const std::string value = trim(std::string_view(t).substr(sep + 1));
    if (field == "phrases" || field == "phrase_string") {
      parsePhraseString(value);
      ann.phrase_string = value;
      have_phrases = true;
    } else if (field == "key") {
      ann.key = parseKey(value);
      have_key = true;
    } else if (field == "mode") {
      mode_override = value;
    } else if (field == "meter") {
      ann.meter = parseMeter(value);
    } else {
      throw DataError("unknown annotation field '" + field + "'");
    }
  }
  if (!have_phrases) throw DataError("annotation is missing 'phrases'");
  if (!have_key) throw DataError("annotation is missing 'key'");
  if (!mode_override.empty()) ann.key.mode = parseMode(mode_override);
  return ann;
}

AnnotationSidecar loadSidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parseSidecar(buf.str());
}

int tickToSlot(std::uint32_t tick, int ticks_per_quarter) {
  // round(2 * tick / tpq) with exact halves rounding down
  const auto tpq = static_cast<std::uint64_t>(ticks_per_quarter);
  return static_cast<int>((4ULL * tick + tpq - 1) / (2 * tpq));
}

std::vector<MelodyNote> quantizeMelody(std::span<const smf::NoteSpan> notes, int ticks_per_quarter) {
  std::vector<MelodyNote> snapped;
  for (const auto& n : notes) {
    const int on = tickToSlot(n.on_tick, ticks_per_quarter);
    const int off = tickToSlot(n.off_tick, ticks_per_quarter);
    snapped.push_back({on, std::max(1, off - on), n.pitch});
  }
  std::stable_sort(snapped.begin(), snapped.end(), [](const MelodyNote& a, const MelodyNote& b) {
    return a.onset_slot != b.onset_slot ? a.onset_slot < b.onset_slot : a.pitch > b.pitch;
  });
  std::vector<MelodyNote> out;
  for (const auto& n : snapped) {
    if (!out.empty() && out.back().onset_slot == n.onset_slot) continue;
    if (!out.empty() && out.back().endSlot() > n.onset_slot) {
      out.back().duration_slots = n.onset_slot - out.back().onset_slot;
    }
    out.push_back(n);
  }
  return out;
}

AnnotatedMelody parseMelodyMidi(const smf::MidiFile& file, const AnnotationSidecar& annotation,
                                const MelodyParseOptions& options) {
  std::vector<std::vector<smf::NoteSpan>> per_track;
  std::vector<std::string> names;
  for (const auto& track : file.tracks) {
    auto notes = smf::extractNotes(track);
    if (notes.empty()) continue;
    per_track.push_back(std::move(notes));
    names.push_back(lower(track.name()));
  }
  if (per_track.empty()) throw DataError("MIDI file has no note track");

  std::size_t chosen = 0;
  bool by_name = false;
  if (!options.melody_track_name.empty()) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == lower(options.melody_track_name)) {
        chosen = i;
        by_name = true;
        break;
      }
    }
  }
  if (!by_name) {
    for (std::size_t i = 1; i < per_track.size(); ++i) {
      if (meanPitch(per_track[i]) > meanPitch(per_track[chosen])) chosen = i;
    }
  }

  AnnotatedMelody melody;
  melody.phrases = parsePhraseString(annotation.phrase_string);
  melody.key = annotation.key;
  melody.meter = annotation.meter;
  melody.notes = quantizeMelody(per_track[chosen], file.ticks_per_quarter);

  const int spb = melody.slotsPerBar();
  const int expected = melody.totalSlots();
  const int actual = melody.notes.empty() ? 0 : melody.notes.back().endSlot();
  const int actual_bars = (actual + spb - 1) / spb;
  if (std::abs(actual_bars - melody.totalBars()) > 1) {
    throw DataError("melody spans " + std::to_string(actual_bars) + " bars but the annotation '" +
                    annotation.phrase_string + "' describes " + std::to_string(melody.totalBars()));
  }
  // Within one bar of the annotation: drop overhang, the tail is padded with rest.
  std::erase_if(melody.notes, [expected](const MelodyNote& n) { return n.onset_slot >= expected; });
  for (auto& n : melody.notes) n.duration_slots = std::min(n.duration_slots, expected - n.onset_slot);
  melody.validate();
  return melody;
}

AnnotatedMelody parseMelodyMidiFile(const std::filesystem::path& path, const AnnotationSidecar& annotation,
                                    const MelodyParseOptions& options) {
  return parseMelodyMidi(smf::readFile(path), annotation, options);
}

smf::MidiFile twoTrackMidi(std::span<const MelodyNote> melody, std::span<const VoicingNote> accompaniment,
                           const Meter& meter, const std::string& second_track_name,
                           const MidiWriteOptions& options) {
  const auto tps = static_cast<std::uint32_t>(options.ticks_per_quarter / 2);
  smf::MidiFile file;
  file.format = 1;
  file.ticks_per_quarter = options.ticks_per_quarter;

  std::vector<smf::MidiEvent> lead{smf::trackName(0, "Melody"), smf::tempo(0, options.tempo_bpm),
                                   smf::timeSignature(0, meter.numerator, meter.denominator),
                                   smf::programChange(0, 0, options.melody_program)};
  const std::size_t lead_head = lead.size();
  for (const auto& n : melody) {
    appendNotes(lead, tps, 0, n.onset_slot, n.duration_slots, n.pitch, options.melody_velocity);
  }
  sortEvents(lead, lead_head);

  std::vector<smf::MidiEvent> accomp{smf::trackName(0, second_track_name),
                                     smf::programChange(0, 1, options.accompaniment_program)};
  const std::size_t accomp_head = accomp.size();
  for (const auto& n : accompaniment) {
    appendNotes(accomp, tps, 1, n.onset_slot, n.duration_slots, n.pitch, n.velocity);
  }
  sortEvents(accomp, accomp_head);

  file.tracks.push_back({std::move(lead)});
  file.tracks.push_back({std::move(accomp)});
  return file;
}

std::vector<std::uint8_t> arrangementMidiBytes(const Arrangement& arrangement, const MidiWriteOptions& options) {
  return smf::serialize(
      twoTrackMidi(arrangement.melody_track, arrangement.accompaniment_track, arrangement.meter, "Piano", options));
}

void writeArrangementMidi(const Arrangement& arrangement, const std::filesystem::path& path,
                          const MidiWriteOptions& options) {
  smf::writeFile(
      twoTrackMidi(arrangement.melody_track, arrangement.accompaniment_track, arrangement.meter, "Piano", options),
      path);
}

std::vector<std::uint8_t> leadSheetMidiBytes(const AnnotatedMelody& melody, const HarmonizationResult& result,
                                             const MidiWriteOptions& options) {
  const auto voicing = result.voicing();
  return smf::serialize(twoTrackMidi(melody.notes, voicing, melody.meter, "Chords", options));
}

}  // namespace accord
