/**
 * @file kernels_omp.cpp
 * @brief OpenMP kernels. One output element per iteration, no cross-thread reductions.
 */
#include "accord/error.hpp"
#include "accord/kernels.hpp"
#include "accord/loss.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace accord::kernels::parallel {

std::vector<double> microLosses(std::span<const int> phrase_pitches, std::span<const ChordSpan> candidates,
                                const Key& key, const MicroLossTable& table) {
  // Exceptions must not escape an OpenMP region; check preconditions up front.
  for (const auto& c : candidates) {
    if (c.size() != phrase_pitches.size()) microLoss(phrase_pitches, c, key, table);
  }
  std::vector<double> out(candidates.size());
  const auto n = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        microLoss(phrase_pitches, candidates[static_cast<std::size_t>(i)], key, table);
  }
  return out;
}

StageOutput dpStage(std::span<const double> prev, std::span<const double> local, const Matrix& macro,
                    double alpha) {
  StageOutput out{std::vector<double>(local.size()), std::vector<int>(local.size(), 0)};
  const auto n = static_cast<long>(local.size());
  const std::size_t np = prev.size();
#pragma omp parallel for schedule(static)
  for (long si = 0; si < n; ++si) {
    const auto s = static_cast<std::size_t>(si);
    double best = prev[0] + alpha * (1.0 - macro(0, s));
    int arg = 0;
    for (std::size_t t = 1; t < np; ++t) {
      const double v = prev[t] + alpha * (1.0 - macro(t, s));
      if (v > best) {
        best = v;
        arg = static_cast<int>(t);
      }
    }
    out.score[s] = local[s] + best;
    out.from[s] = arg;
  }
  return out;
}

Matrix junctionLosses(const TransitionStats& stats, std::span<const ChordSpan> last_bars,
                      std::span<const ChordSpan> first_bars) {
  if (stats.librarySize() < 2) transitionLossFromCount(0, stats.librarySize());
  Matrix m(last_bars.size(), first_bars.size());
  const auto rows = static_cast<long>(last_bars.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < first_bars.size(); ++j) {
      m(r, j) = transitionLoss(stats, last_bars[r], first_bars[j]);
    }
  }
  return m;
}

int threadCount() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace accord::kernels::parallel
