/**
 * @file micro_table.hpp
 * @brief Note-wise melody/chord dissonance table.
 *
 * Two 7x12 matrices (major, minor). Row = diatonic degree of the chord root
 * (1-7), column = interval of the melody pitch class above the key center.
 * Chords on non-diatonic roots use a single flat penalty.
 *
 * File format (JSON):
 *   {"major": [[12 numbers] x 7], "minor": [[12 numbers] x 7], "non_diatonic_penalty": x}
 */
#pragma once

#include <array>
#include <filesystem>

#include "accord/core.hpp"

namespace accord {

struct MicroLossTable {
  using Matrix = std::array<std::array<double, 12>, 7>;

  Matrix major{};
  Matrix minor{};
  double non_diatonic_penalty = 0.6;

  /// degree is 1-based; interval 0-11.
  double at(Mode mode, int degree, int interval) const {
    const Matrix& m = mode == Mode::Major ? major : minor;
    return m[static_cast<std::size_t>(degree - 1)][static_cast<std::size_t>(interval)];
  }

  /// @throws DataError when any entry leaves [0, 1].
  void validate() const;
};

/// Table built from the consonance ranking of melody-vs-chord-root intervals:
/// unison 0, P5 .1, P4 .15, thirds .25, sixths .35, M2/m7 .5, m2/M7 .7,
/// tritone .9; minor-mode dominant rows (v, VII) get +.1 on non-chord tones.
MicroLossTable consonanceRankTable();

/// @throws IoError, DataError
MicroLossTable loadMicroTable(const std::filesystem::path& path);
void saveMicroTable(const MicroLossTable& table, const std::filesystem::path& path);

}  // namespace accord
