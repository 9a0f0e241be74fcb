#include <doctest.h>

#include <omp.h>

#include <random>

#include "accord/error.hpp"
#include "accord/kernels.hpp"
#include "support/test_support.hpp"

using namespace accord;
using namespace accord::kernels;

namespace {

std::vector<double> randomVector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Matrix randomMatrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Matrix m(r, c);
  for (auto& x : m.data) x = u(rng);
  return m;
}

struct ThreadScope {
  int saved = omp_get_max_threads();
  explicit ThreadScope(int n) { omp_set_num_threads(n); }
  ~ThreadScope() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  ThreadScope threads(4);
  std::mt19937_64 rng(99);
  const MicroLossTable table = test::randomMicroTable(rng);

  for (int trial = 0; trial < 20; ++trial) {
    const Mode mode = trial % 2 ? Mode::Minor : Mode::Major;
    const Key key{canonicalTonic(mode), mode};
    const auto mel = test::randomMelody(rng, {8}, key);
    const auto pitches = mel.slotPitches();
    std::vector<ChordProgression> progs;
    for (int i = 0; i < 37; ++i) progs.push_back(test::randomProgression(rng, 8, mode));
    std::vector<ChordSpan> spans;
    for (const auto& p : progs) spans.push_back(p.events());
    CHECK(serial::microLosses(pitches, spans, key, table) == parallel::microLosses(pitches, spans, key, table));

    const std::size_t rows = 1 + rng() % 60;
    const std::size_t cols = 1 + rng() % 60;
    const auto prev = randomVector(rng, rows);
    const auto local = randomVector(rng, cols);
    const auto macro = randomMatrix(rng, rows, cols);
    const auto a = serial::dpStage(prev, local, macro, 0.37);
    const auto b = parallel::dpStage(prev, local, macro, 0.37);
    CHECK(a.score == b.score);
    CHECK(a.from == b.from);
  }

  const Library lib = loadLibrary(test::dataDir() / "seed_library.jsonl");
  const auto stats = buildTransitionStats(lib);
  std::vector<ChordSpan> lasts;
  std::vector<ChordSpan> firsts;
  for (const auto& t : lib.templates()) {
    lasts.push_back(t.progression.bar(-1));
    firsts.push_back(t.progression.bar(0));
  }
  const auto js = serial::junctionLosses(stats, lasts, firsts);
  const auto jp = parallel::junctionLosses(stats, lasts, firsts);
  CHECK(js.data == jp.data);
  CHECK(js(3, 5) == transitionLoss(stats, lasts[3], firsts[5]));
}

TEST_CASE("dpStage breaks ties toward the lowest predecessor") {
  Matrix macro(3, 1, 0.5);
  const std::vector<double> prev = {1.0, 1.0, 0.5};
  const std::vector<double> local = {0.25};
  for (Backend backend : {Backend::Serial, Backend::Parallel}) {
    const auto out = dpStage(backend, prev, local, macro, 1.0);
    CHECK(out.from[0] == 0);
    CHECK(out.score[0] == 0.25 + 1.0 + 0.5);
  }
}

TEST_CASE("solveChain equals exhaustive search") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t stages = 1 + rng() % 4;
    std::vector<std::vector<double>> local;
    std::vector<Matrix> macro;
    for (std::size_t i = 0; i < stages; ++i) {
      local.push_back(randomVector(rng, 1 + rng() % 6));
      if (i > 0) macro.push_back(randomMatrix(rng, local[i - 1].size(), local[i].size()));
    }
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

    double best = -1e300;
    std::vector<std::size_t> idx(stages, 0);
    while (true) {
      double s = 0.0;
      for (std::size_t i = 0; i < stages; ++i) {
        s += local[i][idx[i]];
        if (i > 0) s += alpha * (1.0 - macro[i - 1](idx[i - 1], idx[i]));
      }
      best = std::max(best, s);
      std::size_t k = stages;
      while (k-- > 0) {
        if (++idx[k] < local[k].size()) break;
        idx[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }

    for (Backend backend : {Backend::Serial, Backend::Parallel}) {
      const auto sol = solveChain(local, macro, alpha, backend);
      CHECK(std::abs(sol.total - best) <= 1e-12);
      REQUIRE(sol.path.size() == stages);
      double along = 0.0;
      for (std::size_t i = 0; i < stages; ++i) {
        const auto s = static_cast<std::size_t>(sol.path[i]);
        along += local[i][s];
        if (i > 0) along += alpha * (1.0 - macro[i - 1](static_cast<std::size_t>(sol.path[i - 1]), s));
        CHECK(sol.prefix_scores[i] == doctest::Approx(along).epsilon(1e-12));
      }
      CHECK(sol.prefix_scores.back() == sol.total);
    }
  }
}

TEST_CASE("solveChain rejects bad shapes") {
  CHECK_THROWS_AS(solveChain({}, {}, 0.1), PreconditionError);
  CHECK_THROWS_AS(solveChain({{}}, {}, 0.1), PreconditionError);
  CHECK_THROWS_AS(solveChain({{1.0}, {1.0, 2.0}}, {}, 0.1), PreconditionError);
  CHECK_THROWS_AS(solveChain({{1.0}, {1.0, 2.0}}, {Matrix(1, 1)}, 0.1), PreconditionError);
  CHECK_NOTHROW(solveChain({{1.0}, {1.0, 2.0}}, {Matrix(1, 2)}, 0.1));
}
