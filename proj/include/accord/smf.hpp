/**
 * @file smf.hpp
 * @brief Minimal Standard MIDI File reader/writer.
 *
 * Reads formats 0 and 1 (running status, meta, sysex), writes format 0/1
 * without running status so output bytes are a pure function of the events.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace accord::smf {

enum class EventKind : std::uint8_t { Channel, Meta, SysEx };

struct MidiEvent {
  std::uint32_t tick = 0;  ///< absolute
  EventKind kind = EventKind::Channel;
  std::uint8_t status = 0;     ///< channel status byte, 0xFF for meta, 0xF0/0xF7 for sysex
  std::uint8_t meta_type = 0;  ///< meta events only
  std::vector<std::uint8_t> data;

  int channel() const { return status & 0x0F; }
  int type() const { return status & 0xF0; }
  bool isNoteOn() const { return kind == EventKind::Channel && type() == 0x90 && data.size() == 2 && data[1] > 0; }
  bool isNoteOff() const {
    return kind == EventKind::Channel &&
           (type() == 0x80 || (type() == 0x90 && data.size() == 2 && data[1] == 0));
  }
};

struct MidiTrack {
  std::vector<MidiEvent> events;

  /// Text of the first track-name meta event, empty if none.
  std::string name() const;
};

struct MidiFile {
  int format = 1;
  int ticks_per_quarter = 480;
  std::vector<MidiTrack> tracks;
};

/// A sounding note recovered from on/off pairs.
struct NoteSpan {
  std::uint32_t on_tick = 0;
  std::uint32_t off_tick = 0;
  int pitch = 60;
  int velocity = 64;
  int channel = 0;
};

/// @throws DataError on malformed data (with byte offset).
MidiFile parse(std::span<const std::uint8_t> bytes);
/// @throws IoError, DataError
MidiFile readFile(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize(const MidiFile& file);
/// @throws IoError
void writeFile(const MidiFile& file, const std::filesystem::path& path);

/// Pairs note-ons with note-offs (first-in first-out per channel and pitch).
/// Dangling note-ons end at the track's last tick. Sorted by (on_tick, pitch).
std::vector<NoteSpan> extractNotes(const MidiTrack& track);

// --- event builders -----------------------------------------------------------
MidiEvent noteOn(std::uint32_t tick, int channel, int pitch, int velocity);
MidiEvent noteOff(std::uint32_t tick, int channel, int pitch);
MidiEvent programChange(std::uint32_t tick, int channel, int program);
MidiEvent trackName(std::uint32_t tick, const std::string& name);
MidiEvent tempo(std::uint32_t tick, double bpm);
MidiEvent timeSignature(std::uint32_t tick, int numerator, int denominator);

}  // namespace accord::smf
