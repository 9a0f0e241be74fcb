#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "accord/error.hpp"
#include "accord/library.hpp"
#include "support/test_support.hpp"

using namespace accord;
using accord::test::maj;
using accord::test::min;
using accord::test::perBar;

namespace {

std::size_t countLines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += line.empty() ? 0 : 1;
  return n;
}

std::filesystem::path writeFile(const std::string& name, const std::string& text) {
  const auto dir = test::scratchDir("library");
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("seed library loads with one template per line") {
  const auto path = test::dataDir() / "seed_library.jsonl";
  const Library lib = loadLibrary(path);
  CHECK(lib.size() == countLines(path));
  for (const auto& t : lib.templates()) {
    CHECK((t.length_bars == 4 || t.length_bars == 8));
    CHECK(lib.find(t.id) == &t);
  }
}

TEST_CASE("loadLibrary errors") {
  SUBCASE("empty file") {
    const auto path = writeFile("empty.jsonl", "");
    CHECK_THROWS_WITH_AS(loadLibrary(path), doctest::Contains("empty library"), DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(loadLibrary("/nonexistent/lib.jsonl"), IoError); }
  SUBCASE("length_bars = 6 names the invariant") {
    Template t = test::makeTemplate("x", perBar({maj(0), maj(5), maj(7), maj(0)}));
    std::string line = templateToJsonLine(t);
    line.replace(line.find("\"length_bars\":4"), 15, "\"length_bars\":6");
    const auto path = writeFile("six.jsonl", line + "\n");
    CHECK_THROWS_WITH_AS(loadLibrary(path), doctest::Contains("length_bars"), DataError);
  }
  SUBCASE("malformed record reports line and field") {
    const Template t = test::makeTemplate("ok", perBar({maj(0), maj(5), maj(7), maj(0)}));
    const auto path = writeFile("bad.jsonl", templateToJsonLine(t) + "\n{\"id\":\"b\",\"style\":\"pop_standard\"}\n");
    CHECK_THROWS_WITH_AS(loadLibrary(path), doctest::Contains("line 2"), DataError);
    CHECK_THROWS_WITH_AS(loadLibrary(path), doctest::Contains("mode"), DataError);
  }
  SUBCASE("transposed duplicate is rejected") {
    const Template a = test::makeTemplate("a", perBar({maj(0), maj(5), maj(7), maj(0)}));
    const Template b = test::makeTemplate("b", perBar({maj(2), maj(7), maj(9), maj(2)}));
    CHECK_THROWS_AS(Library({a, b}), DataError);
  }
}

TEST_CASE("template JSON round trip") {
  Template t = test::makeTemplate("rt", perBar({maj(0), min(9), min(2), maj(7)}), Mode::Major, StyleLabel::RnB);
  const Template back = templateFromJsonLine(templateToJsonLine(t));
  CHECK(back.id == t.id);
  CHECK(back.progression == t.progression);
  CHECK(back.voicing == t.voicing);
  CHECK(back.style == StyleLabel::RnB);
  CHECK(back.mode == Mode::Major);
}

TEST_CASE("dedupSignature examples") {
  auto sig = [](const std::vector<ChordEvent>& bars) { return dedupSignature(perBar(bars), Mode::Major); };
  CHECK(sig({maj(0), maj(5), maj(7), maj(0)}) == sig({maj(2), maj(7), maj(9), maj(2)}));
  CHECK(sig({maj(0), maj(5), maj(7), maj(0)}) != sig({maj(0), maj(7), maj(5), maj(0)}));
  const std::vector<ChordEvent> cycle = {maj(0), maj(5), maj(7), maj(0)};
  std::vector<ChordEvent> twice = cycle;
  twice.insert(twice.end(), cycle.begin(), cycle.end());
  CHECK(sig(cycle) != sig(twice));
  CHECK(dedupSignature(perBar(cycle), Mode::Major) != dedupSignature(perBar(cycle), Mode::Minor));
}

TEST_CASE("dedupSignature is invariant under every transposition") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prog = test::randomProgression(rng, trial % 2 ? 8 : 4, Mode::Major);
    const auto base = dedupSignature(prog, Mode::Major);
    for (int k = 1; k < 12; ++k) CHECK(dedupSignature(prog.transposed(k), Mode::Major) == base);
  }
}

TEST_CASE("buildTransitionStats window counts") {
  SUBCASE("one 4-bar template gives three windows") {
    const Library lib({test::makeTemplate("a", perBar({maj(0), maj(5), maj(7), maj(0)}))});
    const auto stats = buildTransitionStats(lib);
    long total = 0;
    for (const auto& [k, c] : stats.counts()) total += c;
    CHECK(total == 3);
    CHECK(stats.librarySize() == 1);
  }
  SUBCASE("constant C major library: one signature counted sum(length - 1) times") {
    // Dedup forbids two identical constant templates of one length and mode, so vary them.
    std::vector<Template> ts = {
        test::makeTemplate("c4M", perBar(std::vector<ChordEvent>(4, maj(0))), Mode::Major),
        test::makeTemplate("c8M", perBar(std::vector<ChordEvent>(8, maj(0))), Mode::Major),
        test::makeTemplate("c4m", perBar(std::vector<ChordEvent>(4, maj(0))), Mode::Minor),
    };
    long expected = 0;
    for (const auto& t : ts) {
      for (int start = 0; start + 2 <= t.length_bars; ++start) ++expected;  // enumerate windows
    }
    const auto stats = buildTransitionStats(Library(ts));
    REQUIRE(stats.counts().size() == 1);
    CHECK(stats.counts().begin()->second == expected);
    CHECK(expected == (4 - 1) + (8 - 1) + (4 - 1));
  }
}

TEST_CASE("transition loss examples") {
  CHECK(transitionLossFromCount(1, 10) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(transitionLossFromCount(10, 10)) <= 1e-12);
  const double direct_c0 = 1.0 + std::log(1.0 / (1.0 / 10.0)) / std::log(10.0);
  CHECK(transitionLossFromCount(0, 10) == doctest::Approx(direct_c0));
  CHECK(transitionLossFromCount(0, 10) == 2.0);
  CHECK(transitionLossFromCount(50, 10) == 0.0);  // clamped
  CHECK_THROWS_AS(transitionLossFromCount(1, 1), PreconditionError);
}

TEST_CASE("transition loss is monotone and bounded") {
  for (std::size_t n : {2u, 3u, 17u, 103u}) {
    double prev = 3.0;
    for (long c = 0; c <= static_cast<long>(n) + 5; ++c) {
      const double t = transitionLossFromCount(c, n);
      CHECK(t >= 0.0);
      CHECK(t <= 2.0);
      CHECK(t <= prev);
      prev = t;
    }
  }
}

TEST_CASE("transition loss depends only on the two junction bars") {
  std::mt19937_64 rng(5);
  const Library lib = loadLibrary(test::dataDir() / "seed_library.jsonl");
  const auto stats = buildTransitionStats(lib);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = test::randomProgression(rng, 4, Mode::Major);
    const auto n = test::randomProgression(rng, 4, Mode::Major);
    const double t = transitionLoss(stats, m.bar(-1), n.bar(0));
    // Perturb every bar except the junction ones.
    auto noise = test::randomProgression(rng, 4, Mode::Major);
    std::vector<ChordEvent> m2(noise.events().begin(), noise.events().end());
    std::copy(m.bar(-1).begin(), m.bar(-1).end(), m2.end() - 8);
    noise = test::randomProgression(rng, 4, Mode::Major);
    std::vector<ChordEvent> n2(noise.events().begin(), noise.events().end());
    std::copy(n.bar(0).begin(), n.bar(0).end(), n2.begin());
    const ChordProgression pm(m2);
    const ChordProgression pn(n2);
    CHECK(transitionLoss(stats, pm.bar(-1), pn.bar(0)) == t);
  }
}

TEST_CASE("stats count of a seed junction matches a direct recount") {
  const Library lib = loadLibrary(test::dataDir() / "seed_library.jsonl");
  const auto stats = buildTransitionStats(lib);
  const auto& t = lib.templates().front();
  const auto a = t.progression.bar(0);
  const auto b = t.progression.bar(1);
  long direct = 0;
  for (const auto& u : lib.templates()) {
    for (int i = 0; i + 1 < u.length_bars; ++i) {
      const auto x = u.progression.bar(i);
      const auto y = u.progression.bar(i + 1);
      direct += (std::equal(x.begin(), x.end(), a.begin()) && std::equal(y.begin(), y.end(), b.begin())) ? 1 : 0;
    }
  }
  CHECK(stats.count(a, b) == direct);
  CHECK(direct >= 1);
}
