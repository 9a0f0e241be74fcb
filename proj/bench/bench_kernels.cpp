// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "accord/kernels.hpp"
#include "accord/library.hpp"

using namespace accord;
using namespace accord::kernels;

namespace {

ChordEvent randomChord(std::mt19937_64& rng) {
  return {PitchClass(static_cast<int>(rng() % 12)), rng() % 2 ? TriadQuality::Minor : TriadQuality::Major};
}

struct MicroInput {
  std::vector<int> pitches;
  std::vector<std::vector<ChordEvent>> storage;
  std::vector<ChordSpan> spans;
};

MicroInput microInput(std::size_t candidates) {
  std::mt19937_64 rng(7);
  MicroInput in;
  for (int s = 0; s < 64; ++s) in.pitches.push_back(rng() % 5 == 0 ? -1 : 60 + static_cast<int>(rng() % 24));
  in.storage.resize(candidates);
  for (auto& c : in.storage) {
    for (int bar = 0; bar < 8; ++bar) c.insert(c.end(), 8, randomChord(rng));
  }
  for (const auto& c : in.storage) in.spans.emplace_back(c);
  return in;
}

template <Backend B>
void BM_MicroLosses(benchmark::State& state) {
  const auto in = microInput(static_cast<std::size_t>(state.range(0)));
  const MicroLossTable table = consonanceRankTable();
  const Key key{PitchClass(0), Mode::Major};
  for (auto _ : state) benchmark::DoNotOptimize(microLosses(B, in.pitches, in.spans, key, table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Backend B>
void BM_DpStage(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> prev(n), local(n);
  Matrix macro(n, n);
  for (auto& v : prev) v = u(rng);
  for (auto& v : local) v = u(rng);
  for (auto& v : macro.data) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dpStage(B, prev, local, macro, 0.1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <Backend B>
void BM_JunctionLosses(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::unordered_map<std::string, long> counts;
  std::vector<std::vector<ChordEvent>> bars(n);
  for (auto& b : bars) b.assign(8, randomChord(rng));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ChordEvent> w = bars[i];
    w.insert(w.end(), bars[(i * 7 + 1) % n].begin(), bars[(i * 7 + 1) % n].end());
    counts[windowKey(w)] += 1 + static_cast<long>(rng() % 20);
  }
  const TransitionStats stats(std::move(counts), 500);
  std::vector<ChordSpan> spans(bars.begin(), bars.end());
  for (auto _ : state) benchmark::DoNotOptimize(junctionLosses(B, stats, spans, spans));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_MicroLosses<Backend::Serial>)->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(BM_MicroLosses<Backend::Parallel>)->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(BM_DpStage<Backend::Serial>)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_DpStage<Backend::Parallel>)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_JunctionLosses<Backend::Serial>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_JunctionLosses<Backend::Parallel>)->Arg(64)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
