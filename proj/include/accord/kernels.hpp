/**
 * @file kernels.hpp
 * @brief Data-parallel inner loops of the harmonizer.
 *
 * Every kernel has a serial reference in accord::kernels::serial and an
 * OpenMP version in accord::kernels::parallel. Both produce bit-identical
 * output: the parallel loops only split independent outputs across threads,
 * every reduction stays inside one thread in the serial order.
 */
#pragma once

#include <span>
#include <vector>

#include "accord/core.hpp"
#include "accord/library.hpp"
#include "accord/micro_table.hpp"

namespace accord::kernels {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

/// DP stage output: best score per current state and the predecessor achieving it.
struct StageOutput {
  std::vector<double> score;
  std::vector<int> from;
};

using ChordSpan = std::span<const ChordEvent>;

enum class Backend { Serial, Parallel };

namespace serial {

/// Micro loss of one phrase against many candidate chord sequences.
std::vector<double> microLosses(std::span<const int> phrase_pitches, std::span<const ChordSpan> candidates,
                                const Key& key, const MicroLossTable& table);

/// score[s] = local[s] + max_t(prev[t] + alpha * (1 - macro(t, s))).
/// Ties resolve to the lowest t.
StageOutput dpStage(std::span<const double> prev, std::span<const double> local, const Matrix& macro,
                    double alpha);

/// loss(i, j) = transitionLoss(last_bars[i] -> first_bars[j]).
Matrix junctionLosses(const TransitionStats& stats, std::span<const ChordSpan> last_bars,
                      std::span<const ChordSpan> first_bars);

}  // namespace serial

namespace parallel {

std::vector<double> microLosses(std::span<const int> phrase_pitches, std::span<const ChordSpan> candidates,
                                const Key& key, const MicroLossTable& table);
StageOutput dpStage(std::span<const double> prev, std::span<const double> local, const Matrix& macro,
                    double alpha);
Matrix junctionLosses(const TransitionStats& stats, std::span<const ChordSpan> last_bars,
                      std::span<const ChordSpan> first_bars);

/// Threads OpenMP will use (1 when built without OpenMP).
int threadCount();

}  // namespace parallel

std::vector<double> microLosses(Backend backend, std::span<const int> phrase_pitches,
                                std::span<const ChordSpan> candidates, const Key& key,
                                const MicroLossTable& table);
StageOutput dpStage(Backend backend, std::span<const double> prev, std::span<const double> local,
                    const Matrix& macro, double alpha);
Matrix junctionLosses(Backend backend, const TransitionStats& stats, std::span<const ChordSpan> last_bars,
                      std::span<const ChordSpan> first_bars);

struct ChainSolution {
  std::vector<int> path;  ///< chosen state per stage
  double total = 0.0;     ///< best final score
  std::vector<double> prefix_scores;  ///< recurrence value along the path
};

/// Max-score chain DP. `local[i][s]` is the per-state score of stage i,
/// `macro[i-1](t, s)` the loss of moving from state t of stage i-1 to s of
/// stage i. Stage 0 carries no transition term. Final ties pick the lowest s.
/// @throws PreconditionError on empty stages or mismatched shapes.
ChainSolution solveChain(const std::vector<std::vector<double>>& local, const std::vector<Matrix>& macro,
                         double alpha, Backend backend = Backend::Parallel);

}  // namespace accord::kernels
