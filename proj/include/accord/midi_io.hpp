/**
 * @file midi_io.hpp
 * @brief Melody import with phrase annotation, arrangement and lead-sheet export.
 *
 * Annotation sidecar (plain text, one field per line, ':' or '='):
 *
 *   phrases: A8A8B8
 *   key: G major
 *   meter: 4/4
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "accord/arranger.hpp"
#include "accord/core.hpp"
#include "accord/harmonizer.hpp"
#include "accord/smf.hpp"

namespace accord {

struct AnnotationSidecar {
  std::string phrase_string;
  Key key;
  Meter meter;
};

/// "A8A8B8" -> [A:8 @0, A:8 @8, B:8 @16]. @throws DataError with the character position.
std::vector<Phrase> parsePhraseString(std::string_view text);
/// "4/4" or "2/4". @throws DataError
Meter parseMeter(std::string_view text);
/// "G major", "Eb minor", "F#". @throws DataError
Key parseKey(std::string_view text);

/// @throws DataError
AnnotationSidecar parseSidecar(std::string_view text);
/// @throws IoError, DataError
AnnotationSidecar loadSidecar(const std::filesystem::path& path);

struct MelodyParseOptions {
  /// Preferred melody track name (case-insensitive); otherwise highest mean pitch.
  std::string melody_track_name = "melody";
};

/// 8th-note slot of a tick, ties between grid points going to the earlier one.
int tickToSlot(std::uint32_t tick, int ticks_per_quarter);

/// Snap note spans to slots and make them monophonic (highest pitch wins a
/// shared onset, earlier notes are cut at the next onset).
std::vector<MelodyNote> quantizeMelody(std::span<const smf::NoteSpan> notes, int ticks_per_quarter);

/// @throws DataError (no note track, length incompatible with the annotation)
AnnotatedMelody parseMelodyMidi(const smf::MidiFile& file, const AnnotationSidecar& annotation,
                                const MelodyParseOptions& options = {});
AnnotatedMelody parseMelodyMidiFile(const std::filesystem::path& path, const AnnotationSidecar& annotation,
                                    const MelodyParseOptions& options = {});

struct MidiWriteOptions {
  int ticks_per_quarter = 480;
  double tempo_bpm = 120.0;
  int melody_velocity = 100;
  int melody_program = 0;
  int accompaniment_program = 0;
};

/// Format-1 file: track 1 melody (with tempo and meter), track 2 accompaniment.
smf::MidiFile twoTrackMidi(std::span<const MelodyNote> melody, std::span<const VoicingNote> accompaniment,
                           const Meter& meter, const std::string& second_track_name,
                           const MidiWriteOptions& options = {});

std::vector<std::uint8_t> arrangementMidiBytes(const Arrangement& arrangement, const MidiWriteOptions& options = {});
/// @throws IoError
void writeArrangementMidi(const Arrangement& arrangement, const std::filesystem::path& path,
                          const MidiWriteOptions& options = {});

/// Melody plus the harmonization's block-chord voicings.
std::vector<std::uint8_t> leadSheetMidiBytes(const AnnotatedMelody& melody, const HarmonizationResult& result,
                                             const MidiWriteOptions& options = {});

}  // namespace accord
