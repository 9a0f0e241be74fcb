/**
 * @file kernels_serial.cpp
 * @brief Serial reference kernels and the chain DP driver.
 */
#include "accord/error.hpp"
#include "accord/kernels.hpp"
#include "accord/loss.hpp"

namespace accord::kernels {

namespace serial {

std::vector<double> microLosses(std::span<const int> phrase_pitches, std::span<const ChordSpan> candidates,
                                const Key& key, const MicroLossTable& table) {
  std::vector<double> out(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out[i] = microLoss(phrase_pitches, candidates[i], key, table);
  }
  return out;
}

StageOutput dpStage(std::span<const double> prev, std::span<const double> local, const Matrix& macro,
                    double alpha) {
  StageOutput out{std::vector<double>(local.size()), std::vector<int>(local.size(), 0)};
  for (std::size_t s = 0; s < local.size(); ++s) {
    double best = prev[0] + alpha * (1.0 - macro(0, s));
    int arg = 0;
    for (std::size_t t = 1; t < prev.size(); ++t) {
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
  Matrix m(last_bars.size(), first_bars.size());
  for (std::size_t i = 0; i < last_bars.size(); ++i) {
    for (std::size_t j = 0; j < first_bars.size(); ++j) {
      m(i, j) = transitionLoss(stats, last_bars[i], first_bars[j]);
    }
  }
  return m;
}

}  // namespace serial

std::vector<double> microLosses(Backend backend, std::span<const int> phrase_pitches,
                                std::span<const ChordSpan> candidates, const Key& key,
                                const MicroLossTable& table) {
  return backend == Backend::Serial ? serial::microLosses(phrase_pitches, candidates, key, table)
                                    : parallel::microLosses(phrase_pitches, candidates, key, table);
}

StageOutput dpStage(Backend backend, std::span<const double> prev, std::span<const double> local,
                    const Matrix& macro, double alpha) {
  return backend == Backend::Serial ? serial::dpStage(prev, local, macro, alpha)
                                    : parallel::dpStage(prev, local, macro, alpha);
}

Matrix junctionLosses(Backend backend, const TransitionStats& stats, std::span<const ChordSpan> last_bars,
                      std::span<const ChordSpan> first_bars) {
  return backend == Backend::Serial ? serial::junctionLosses(stats, last_bars, first_bars)
                                    : parallel::junctionLosses(stats, last_bars, first_bars);
}

ChainSolution solveChain(const std::vector<std::vector<double>>& local, const std::vector<Matrix>& macro,
                         double alpha, Backend backend) {
  if (local.empty()) throw PreconditionError("chain DP needs at least one stage");
  if (macro.size() + 1 != local.size()) throw PreconditionError("chain DP: need one transition matrix per stage boundary");
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i].empty()) throw PreconditionError("chain DP: stage " + std::to_string(i) + " has no states");
    if (i > 0 && (macro[i - 1].rows != local[i - 1].size() || macro[i - 1].cols != local[i].size())) {
      throw PreconditionError("chain DP: transition matrix shape mismatch at stage " + std::to_string(i));
    }
  }

  std::vector<std::vector<double>> scores{local[0]};
  std::vector<std::vector<int>> from{{}};
  for (std::size_t i = 1; i < local.size(); ++i) {
    auto stage = dpStage(backend, scores.back(), local[i], macro[i - 1], alpha);
    scores.push_back(std::move(stage.score));
    from.push_back(std::move(stage.from));
  }

  const auto& last = scores.back();
  std::size_t best = 0;
  for (std::size_t s = 1; s < last.size(); ++s) {
    if (last[s] > last[best]) best = s;
  }

  ChainSolution sol;
  sol.total = last[best];
  sol.path.assign(local.size(), 0);
  sol.prefix_scores.assign(local.size(), 0.0);
  int state = static_cast<int>(best);
  for (std::size_t i = local.size(); i-- > 0;) {
    sol.path[i] = state;
    sol.prefix_scores[i] = scores[i][static_cast<std::size_t>(state)];
    if (i > 0) state = from[i][static_cast<std::size_t>(state)];
  }
  return sol;
}

}  // namespace accord::kernels
