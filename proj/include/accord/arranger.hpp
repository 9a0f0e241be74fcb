/**
 * @file arranger.hpp
 * @brief Accompaniment arrangement: texture search plus chord retargeting.
 *
 * Textures are phrase-long accompaniment excerpts recorded over known source
 * chords. The search picks one texture per phrase by Viterbi over
 * (fitness to the melody phrase) + weight * (smoothness between consecutive
 * textures); phrases sharing a label reuse one texture. Each chosen texture
 * is then moved onto the harmonization's chords by chord-tone remapping.
 *
 * Texture library file: line-delimited JSON,
 *   {"id": "...", "complexity": "sparse|medium|dense", "length_bars": 4,
 *    "source_chords": [[root, "maj"|"min"], ...one per slot],
 *    "notes": [[onset, duration, pitch, velocity], ...], "source": "..."}
 */
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "accord/core.hpp"
#include "accord/harmonizer.hpp"

namespace accord {

enum class Complexity : std::uint8_t { Sparse, Medium, Dense };

std::string_view complexityName(Complexity c);
/// @throws DataError
Complexity parseComplexity(std::string_view text);

struct TexturePhrase {
  std::string id;
  int length_bars = 4;
  std::vector<VoicingNote> notes;  ///< phrase-relative slots, canonical key
  ChordProgression source_chords;
  Complexity complexity = Complexity::Medium;
  std::string source;

  int slots() const { return length_bars * kTemplateSlotsPerBar; }
  /// Distinct onset slots per bar.
  double rhythmDensity() const;
  int registerLow() const;
  int registerHigh() const;
  /// @throws DataError
  void validate() const;
};

using TextureLibrary = std::vector<TexturePhrase>;

/// @throws IoError, DataError ("line N: ...")
TextureLibrary loadTextureLibrary(const std::filesystem::path& path);
std::string textureToJsonLine(const TexturePhrase& t);

struct ArrangerConfig {
  double density_weight = 0.5;
  double register_weight = 0.5;
  /// Texture may be this many times denser than the melody before it is penalized.
  double max_density_ratio = 3.0;
  double transition_weight = 0.5;
  /// Same phrase label (and length) means same texture.
  bool reuse_labels = true;
};

/// Fitness of a texture under one melody phrase, in [0, 1].
/// `melody_notes` are phrase-relative; `phrase_slots` must equal texture.slots().
/// @throws PreconditionError on a length mismatch.
double phraseFitness(std::span<const MelodyNote> melody_notes, int phrase_slots, const TexturePhrase& texture,
                     const ArrangerConfig& config = {});

/// Smoothness between consecutive textures, in [0, 1].
double textureSmoothness(const TexturePhrase& a, const TexturePhrase& b);

/// Search problem in index form (also used by the brute-force test oracle).
struct TextureProblem {
  std::vector<std::vector<int>> options;      ///< per phrase: texture indices
  std::vector<std::vector<double>> fitness;   ///< per phrase, per option
  std::function<double(int, int)> smoothness;  ///< by texture index
  std::vector<int> groups;  ///< per phrase; equal groups must pick equal textures (-1 = free)
  double transition_weight = 0.5;
};

struct TexturePath {
  std::vector<int> textures;  ///< chosen texture index per phrase
  double score = 0.0;
};

/// Exact Viterbi over the problem, with the group constraint folded into the state.
/// @throws DataError when no assignment satisfies the constraints.
TexturePath viterbiTextures(const TextureProblem& problem);

struct TextureSearchResult {
  std::vector<std::string> texture_ids;
  double score = 0.0;
  std::vector<std::string> warnings;
};

/// @throws DataError "no texture of matching length"
TextureSearchResult searchTextures(const AnnotatedMelody& melody, const HarmonizationResult& harmonization,
                                   const TextureLibrary& textures, Complexity complexity,
                                   const ArrangerConfig& config = {});

/// Retarget a texture to new chords; rhythm and velocities are kept.
/// @throws PreconditionError on a slot-count mismatch.
std::vector<VoicingNote> reharmonize(const TexturePhrase& texture, const ChordProgression& target_chords,
                                     const Key& target_key);

struct Arrangement {
  std::vector<MelodyNote> melody_track;
  std::vector<VoicingNote> accompaniment_track;
  std::vector<ChordEvent> chords_used;  ///< per slot
  std::vector<std::string> texture_ids;  ///< per phrase
  std::vector<int> phrase_start_slots;
  Key key;
  Meter meter;
  Complexity complexity = Complexity::Medium;
  std::vector<std::string> warnings;

  int totalSlots() const { return static_cast<int>(chords_used.size()); }
};

/// search_textures, then reharmonize every phrase onto the harmonization's chords.
Arrangement arrange(const AnnotatedMelody& melody, const HarmonizationResult& harmonization,
                    const TextureLibrary& textures, Complexity complexity, const ArrangerConfig& config = {});

/// Redo one phrase after a restyle, keeping its texture id.
Arrangement rearrangePhrase(const Arrangement& arrangement, const HarmonizationResult& harmonization,
                            const TextureLibrary& textures, std::size_t phrase);

/// Onsets whose pitch class is neither a triad tone of the sounding chord nor in the key's scale.
std::size_t chordCoverageViolations(std::span<const VoicingNote> notes, std::span<const ChordEvent> chords,
                                    const Key& key);

/// Distinct onset slots per bar of 8 slots.
double onsetsPerBar(std::span<const VoicingNote> notes, int total_slots);

}  // namespace accord
