/**
 * @file test_support.hpp
 * @brief Shared fixtures and independent oracles for the test binaries.
 */
#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "accord/arranger.hpp"
#include "accord/core.hpp"
#include "accord/harmonizer.hpp"
#include "accord/library.hpp"
#include "accord/loss.hpp"
#include "accord/smf.hpp"

namespace accord::test {

inline std::filesystem::path sourceDir() { return ACCORD_SOURCE_DIR; }
inline std::filesystem::path dataDir() { return sourceDir() / "data"; }
inline std::filesystem::path fixturesDir() { return sourceDir() / "tests" / "fixtures"; }
inline std::filesystem::path goldenDir() { return sourceDir() / "tests" / "golden"; }

/// Fresh scratch directory under the system temp dir.
std::filesystem::path scratchDir(const std::string& name);

inline ChordEvent maj(int root) { return {PitchClass(root), TriadQuality::Major}; }
inline ChordEvent min(int root) { return {PitchClass(root), TriadQuality::Minor}; }

/// One chord per bar, 8 slots each.
ChordProgression perBar(const std::vector<ChordEvent>& bars);

/// Template with a block-triad voicing (bass + close triad) per chord run.
Template makeTemplate(const std::string& id, const ChordProgression& prog, Mode mode = Mode::Major,
                      StyleLabel style = StyleLabel::PopStandard);

/// Random chords, one or two per bar, mostly diatonic to the canonical key.
ChordProgression randomProgression(std::mt19937_64& rng, int bars, Mode mode);

/// Random monophonic melody over the given phrases (4/4).
AnnotatedMelody randomMelody(std::mt19937_64& rng, const std::vector<int>& phrase_bars, Key key);

/// Random table with entries in [0, 1].
MicroLossTable randomMicroTable(std::mt19937_64& rng);

/// Best assignment found by enumerating every candidate tuple.
struct BruteForceResult {
  double best = 0.0;
  std::vector<std::string> ids;
  std::size_t tuples = 0;
};

/// Scores every candidate tuple with the weighted (1 - loss) sum directly.
BruteForceResult bruteForceHarmonize(const AnnotatedMelody& melody, const Library& lib,
                                     const TransitionStats& stats, const HarmonizerConfig& config);

/// A random harmonization instance small enough to enumerate.
struct SmallInstance {
  Library library;
  AnnotatedMelody melody;
  HarmonizerConfig config;
};

/// At most `max_phrases` phrases and at most `max_candidates` candidates per phrase;
/// the library also holds templates of the other length and mode.
SmallInstance randomInstance(std::mt19937_64& rng, int max_phrases = 4, int max_candidates = 20);

/// Exhaustive texture search honoring the group constraint.
TexturePath bruteForceTextures(const TextureProblem& problem);

/// Texture of block chords over `chords`, with bass in [36, 48) and triad in [48, 60).
TexturePhrase blockTexture(const std::string& id, const ChordProgression& chords, int onsets_per_bar = 1,
                           int register_shift = 0);

/// Spreadsheet-style micro loss: one row per slot, table cell per interval above the chord root.
double microLossBySlot(std::span<const int> pitches, std::span<const ChordEvent> chords, const Key& key);

/// The template sounding `k` semitones above its stored key, with a matching key signature.
smf::MidiFile transposedMidi(const Template& t, int k);

}  // namespace accord::test
