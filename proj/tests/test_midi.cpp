#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>

#include "accord/error.hpp"
#include "accord/midi_io.hpp"
#include "accord/smf.hpp"
#include "support/test_support.hpp"

using namespace accord;
namespace fs = std::filesystem;

namespace {

const char* const kFixtures[] = {"mel01_format0",    "mel02_conductor", "mel03_running_status", "mel04_offgrid",
                                 "mel05_overlap",    "mel06_multitrack", "mel07_two_four",      "mel08_triplets",
                                 "mel09_partial_bar", "mel10_sysex_chunk"};

AnnotatedMelody loadFixture(const std::string& name) {
  const auto dir = test::fixturesDir();
  return parseMelodyMidiFile(dir / (name + ".mid"), loadSidecar(dir / (name + ".ann")));
}

std::vector<std::uint8_t> readBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Arrangement demoArrangement() {
  const auto dir = test::dataDir() / "demo";
  const auto mel = parseMelodyMidiFile(dir / "demo_melody.mid", loadSidecar(dir / "demo_melody.ann"));
  const Library lib = loadLibrary(test::dataDir() / "seed_library.jsonl");
  const auto harm = harmonize(mel, lib, buildTransitionStats(lib), HarmonizerConfig{});
  return arrange(mel, harm, loadTextureLibrary(test::dataDir() / "textures.jsonl"), Complexity::Medium);
}

}  // namespace

TEST_CASE("phrase strings") {
  const auto p = parsePhraseString("A8A8B8");
  REQUIRE(p.size() == 3);
  CHECK(p[0].label == 'A');
  CHECK(p[2].label == 'B');
  CHECK(p[1].start_bar == 8);
  CHECK(p[2].start_bar == 16);
  int bars = 0;
  for (const auto& ph : p) bars += ph.length_bars;
  CHECK(bars == 24);
  CHECK(parsePhraseString("A4").size() == 1);
  CHECK_THROWS_WITH_AS(parsePhraseString("A6"), doctest::Contains("position 2"), DataError);
  CHECK_THROWS_WITH_AS(parsePhraseString("A8-B4"), doctest::Contains("position 3"), DataError);
  CHECK_THROWS_AS(parsePhraseString("8A"), DataError);
  CHECK_THROWS_AS(parsePhraseString("A"), DataError);
  CHECK_THROWS_AS(parsePhraseString(""), DataError);
}

TEST_CASE("annotation sidecars") {
  const auto a = parseSidecar("# demo\nphrases = A4B4\nkey: Eb\nmode: minor\nmeter: 2/4\n");
  CHECK(a.phrase_string == "A4B4");
  CHECK(a.key == Key{PitchClass(3), Mode::Minor});
  CHECK(a.meter.numerator == 2);
  CHECK(parseKey("G major") == Key{PitchClass(7), Mode::Major});
  CHECK(parseKey("f# minor") == Key{PitchClass(6), Mode::Minor});
  CHECK_THROWS_AS(parseMeter("3/4"), DataError);
  CHECK_THROWS_WITH_AS(parseSidecar("key: C\n"), doctest::Contains("phrases"), DataError);
  CHECK_THROWS_WITH_AS(parseSidecar("phrases: A4\nkey: C\ntempo: 90\n"), doctest::Contains("tempo"), DataError);
  CHECK_THROWS_AS(loadSidecar("/nonexistent.ann"), IoError);
}

TEST_CASE("tickToSlot snaps to the nearest slot, ties earlier") {
  for (int tpq : {96, 120, 192, 384, 480, 960}) {
    const int half = tpq / 2;
    for (std::uint32_t tick = 0; tick < static_cast<std::uint32_t>(tpq * 8); tick += 7) {
      // Oracle: compare distances to the two neighbouring grid points.
      const int lo = static_cast<int>(tick) / half;
      const int d_lo = static_cast<int>(tick) - lo * half;
      const int d_hi = (lo + 1) * half - static_cast<int>(tick);
      const int expected = d_lo <= d_hi ? lo : lo + 1;
      CHECK(tickToSlot(tick, tpq) == expected);
    }
  }
  CHECK(tickToSlot(120, 480) == 0);
  CHECK(tickToSlot(121, 480) == 1);
  CHECK(tickToSlot(360, 480) == 1);
}

TEST_CASE("quantizing grid-aligned notes changes nothing") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mel = test::randomMelody(rng, {4, 8}, Key{PitchClass(0), Mode::Major});
    for (int tpq : {96, 480}) {
      std::vector<smf::NoteSpan> spans;
      for (const auto& n : mel.notes) {
        spans.push_back({static_cast<std::uint32_t>(n.onset_slot * tpq / 2),
                         static_cast<std::uint32_t>(n.endSlot() * tpq / 2), n.pitch, 90, 0});
      }
      const auto q = quantizeMelody(spans, tpq);
      CHECK(q == mel.notes);
      std::vector<smf::NoteSpan> again;
      for (const auto& n : q) {
        again.push_back({static_cast<std::uint32_t>(n.onset_slot * tpq / 2),
                         static_cast<std::uint32_t>(n.endSlot() * tpq / 2), n.pitch, 90, 0});
      }
      CHECK(quantizeMelody(again, tpq) == q);
    }
  }
}

TEST_CASE("overlapping notes come out monophonic") {
  const std::vector<smf::NoteSpan> spans = {{0, 960, 60, 90, 0}, {480, 960, 64, 90, 0}, {480, 720, 67, 90, 0}};
  const auto q = quantizeMelody(spans, 480);
  REQUIRE(q.size() == 2);
  CHECK(q[0] == MelodyNote{0, 2, 60});
  CHECK(q[1] == MelodyNote{2, 1, 67});

  const auto mel = loadFixture("mel05_overlap");
  for (std::size_t i = 1; i < mel.notes.size(); ++i) CHECK(mel.notes[i - 1].endSlot() <= mel.notes[i].onset_slot);
}

TEST_CASE("every fixture parses and survives parse-write-parse unchanged") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    const auto ann = loadSidecar(test::fixturesDir() / (std::string(name) + ".ann"));
    const auto mel = loadFixture(name);
    CHECK_NOTHROW(mel.validate());
    CHECK_FALSE(mel.notes.empty());

    const auto bytes = smf::serialize(twoTrackMidi(mel.notes, {}, mel.meter, "Piano"));
    const auto again = parseMelodyMidi(smf::parse(bytes), ann);
    CHECK(again.notes == mel.notes);
    CHECK(again.totalSlots() == mel.totalSlots());
    CHECK(smf::serialize(twoTrackMidi(again.notes, {}, again.meter, "Piano")) == bytes);
  }
}

TEST_CASE("fixture specifics") {
  CHECK(loadFixture("mel02_conductor").totalSlots() == 64);
  const auto two_four = loadFixture("mel07_two_four");
  CHECK(two_four.meter.numerator == 2);
  CHECK(two_four.totalSlots() == 32);
  const auto partial = loadFixture("mel09_partial_bar");
  CHECK(partial.totalSlots() == 192);
  int last = 0;
  for (const auto& n : partial.notes) last = std::max(last, n.endSlot());
  CHECK(last <= 188);
  const auto sysex = smf::readFile(test::fixturesDir() / "mel10_sysex_chunk.mid");
  CHECK(sysex.ticks_per_quarter == 192);
}

TEST_CASE("melody length must agree with the annotation") {
  auto ann = loadSidecar(test::fixturesDir() / "mel01_format0.ann");
  const auto file = smf::readFile(test::fixturesDir() / "mel01_format0.mid");
  ann.phrase_string = "A8A8B8";
  CHECK_THROWS_WITH_AS(parseMelodyMidi(file, ann), doctest::Contains("bars"), DataError);
  smf::MidiFile silent;
  silent.tracks.push_back({{smf::trackName(0, "empty")}});
  ann.phrase_string = "A4";
  CHECK_THROWS_WITH_AS(parseMelodyMidi(silent, ann), doctest::Contains("no note track"), DataError);
}

TEST_CASE("smf reader rejects malformed data") {
  const std::vector<std::uint8_t> junk = {'R', 'I', 'F', 'F', 0, 0, 0, 6, 0, 1, 0, 1, 1, 224};
  CHECK_THROWS_AS(smf::parse(junk), DataError);
  auto bytes = readBytes(test::fixturesDir() / "mel01_format0.mid");
  bytes.resize(bytes.size() - 5);
  CHECK_THROWS_AS(smf::parse(bytes), DataError);
  CHECK_THROWS_AS(smf::readFile("/nonexistent.mid"), IoError);
}

TEST_CASE("smf serialize and parse are inverse on written files") {
  smf::MidiFile f;
  f.format = 1;
  f.ticks_per_quarter = 96;
  f.tracks.push_back({{smf::trackName(0, "t"), smf::tempo(0, 90.0), smf::noteOn(0, 3, 60, 70), smf::noteOff(96, 3, 60),
                       smf::programChange(100, 3, 5)}});
  const auto bytes = smf::serialize(f);
  const auto back = smf::parse(bytes);
  CHECK(smf::serialize(back) == bytes);
  const auto notes = smf::extractNotes(back.tracks[0]);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].channel == 3);
  CHECK(notes[0].off_tick == 96);
  CHECK(back.tracks[0].name() == "t");
}

TEST_CASE("empty accompaniment still writes two tracks") {
  const auto mel = loadFixture("mel01_format0");
  const auto f = smf::parse(smf::serialize(twoTrackMidi(mel.notes, {}, mel.meter, "Piano")));
  CHECK(f.format == 1);
  REQUIRE(f.tracks.size() == 2);
  CHECK(smf::extractNotes(f.tracks[1]).empty());
  CHECK(f.tracks[1].name() == "Piano");
}

TEST_CASE("demo arrangement bytes match the golden file") {
  const auto bytes = arrangementMidiBytes(demoArrangement());
  const auto golden = test::goldenDir() / "demo_arrangement.mid";
  if (const char* update = std::getenv("ACCORD_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    fs::create_directories(golden.parent_path());
    std::ofstream(golden, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                  static_cast<std::streamsize>(bytes.size()));
  }
  REQUIRE(fs::exists(golden));
  CHECK(readBytes(golden) == bytes);
  CHECK(arrangementMidiBytes(demoArrangement()) == bytes);
}

TEST_CASE("re-parsed demo arrangement keeps melody and chord coverage") {
  const auto a = demoArrangement();
  const auto file = smf::parse(arrangementMidiBytes(a));
  REQUIRE(file.tracks.size() == 2);
  CHECK(file.tracks[0].name() == "Melody");

  const auto ann = loadSidecar(test::dataDir() / "demo" / "demo_melody.ann");
  CHECK(parseMelodyMidi(file, ann).notes == a.melody_track);

  std::vector<VoicingNote> accomp;
  for (const auto& n : smf::extractNotes(file.tracks[1])) {
    const int on = tickToSlot(n.on_tick, file.ticks_per_quarter);
    accomp.push_back({on, tickToSlot(n.off_tick, file.ticks_per_quarter) - on, n.pitch, n.velocity});
  }
  std::sort(accomp.begin(), accomp.end());
  CHECK(accomp.size() == a.accompaniment_track.size());
  CHECK(accomp == a.accompaniment_track);
  CHECK(chordCoverageViolations(accomp, a.chords_used, a.key) == 0);
}

TEST_CASE("lead sheet carries melody and template chords") {
  const auto dir = test::dataDir() / "demo";
  const auto mel = parseMelodyMidiFile(dir / "demo_melody.mid", loadSidecar(dir / "demo_melody.ann"));
  const Library lib = loadLibrary(test::dataDir() / "seed_library.jsonl");
  const auto harm = harmonize(mel, lib, buildTransitionStats(lib), HarmonizerConfig{});
  const auto f = smf::parse(leadSheetMidiBytes(mel, harm));
  REQUIRE(f.tracks.size() == 2);
  CHECK(f.tracks[1].name() == "Chords");
  CHECK(smf::extractNotes(f.tracks[1]).size() == harm.voicing().size());
}
