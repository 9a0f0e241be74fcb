/**
 * @file curation.cpp
 * @brief Corpus filtering, chord extraction, key canonicalization and dedup.
 */
#include "accord/curation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "accord/error.hpp"
#include "accord/midi_io.hpp"

namespace accord {

namespace {

std::string lowerTrim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                  2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                  2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

double correlation(const std::array<double, 12>& x, const std::array<double, 12>& profile, int tonic) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 12.0;
  const double mp = std::accumulate(profile.begin(), profile.end(), 0.0) / 12.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    const double dy = profile[static_cast<std::size_t>(PitchClass(i - tonic).value())] - mp;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return (sxx == 0.0 || syy == 0.0) ? 0.0 : sxy / std::sqrt(sxx * syy);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string templateId(const std::string& signature, Mode mode) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a(signature);
  std::string out = mode == Mode::Major ? "M" : "m";
  for (int i = 0; i < 12; ++i) {
    out.push_back(kHex[h & 0xF]);
    h >>= 4;
  }
  return out;
}

bool isMidiFile(const std::filesystem::path& p) {
  const std::string ext = lowerTrim(p.extension().string());
  return ext == ".mid" || ext == ".midi";
}

std::string plural(int n, const char* word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

}  // namespace

StyleMap::StyleMap(std::map<std::string, StyleLabel> entries) {
  for (auto& [raw, style] : entries) entries_[lowerTrim(raw)] = style;
}

StyleLabel StyleMap::lookup(std::string_view raw) const {
  const auto it = entries_.find(lowerTrim(raw));
  return it == entries_.end() ? StyleLabel::Unknown : it->second;
}

bool StyleMap::contains(std::string_view raw) const { return entries_.contains(lowerTrim(raw)); }

StyleMap parseStyleMap(std::string_view text) {
  std::map<std::string, StyleLabel> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (lowerTrim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("style map line " + std::to_string(line_no) + ": expected 'raw = style'");
    const std::string raw = lowerTrim(std::string_view(line).substr(0, eq));
    if (raw.empty()) throw DataError("style map line " + std::to_string(line_no) + ": empty raw label");
    try {
      entries[raw] = parseStyle(lowerTrim(std::string_view(line).substr(eq + 1)));
    } catch (const DataError& e) {
      throw DataError("style map line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return StyleMap(std::move(entries));
}

StyleMap loadStyleMap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open style map " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parseStyleMap(buf.str());
}

std::string CurationReport::text() const {
  std::ostringstream out;
  out << "files scanned: " << files_scanned << "\n";
  out << "unreadable (skipped): " << unreadable << "\n";
  out << "pass 1 filter: " << rejected_melody << " melody-like, " << rejected_rhythm << " rhythmically complex, "
      << rejected_length << " wrong length\n";
  out << "pass 2 styles: " << style_mapped << " mapped, " << style_unknown << " unknown\n";
  out << "pass 3 dedup: " << plural(duplicates_removed, "duplicate") << " removed\n";
  out << "templates kept: " << kept << "\n";
  for (const auto& [style, n] : kept_by_style) out << "  " << styleName(style) << ": " << n << "\n";
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

ChordTrackAnalysis analyzeChordTrack(std::span<const VoicingNote> notes) {
  ChordTrackAnalysis a;
  for (const auto& n : notes) a.slots = std::max(a.slots, n.endSlot());
  a.polyphony.assign(static_cast<std::size_t>(a.slots), 0);
  a.sounding.assign(static_cast<std::size_t>(a.slots), {});
  std::set<int> onsets;
  for (const auto& n : notes) {
    onsets.insert(n.onset_slot);
    a.pc_weight[static_cast<std::size_t>(PitchClass(n.pitch).value())] += n.duration_slots;
    for (int s = n.onset_slot; s < n.endSlot(); ++s) {
      ++a.polyphony[static_cast<std::size_t>(s)];
      a.sounding[static_cast<std::size_t>(s)].push_back(n.pitch);
    }
  }
  a.onset_slots.assign(onsets.begin(), onsets.end());
  return a;
}

double thinSlotFraction(const ChordTrackAnalysis& a, int min_notes) {
  int sounding = 0;
  int thin = 0;
  for (const int p : a.polyphony) {
    if (p == 0) continue;
    ++sounding;
    if (p < min_notes) ++thin;
  }
  return sounding == 0 ? 0.0 : static_cast<double>(thin) / sounding;
}

double ioiEntropy(const ChordTrackAnalysis& a) {
  if (a.onset_slots.size() < 2) return 0.0;
  std::map<int, int> hist;
  for (std::size_t i = 1; i < a.onset_slots.size(); ++i) ++hist[a.onset_slots[i] - a.onset_slots[i - 1]];
  const double total = static_cast<double>(a.onset_slots.size() - 1);
  double h = 0.0;
  for (const auto& [gap, n] : hist) {
    const double p = n / total;
    h -= p * std::log2(p);
  }
  return h;
}

Key detectKey(const std::array<double, 12>& pc_weight) {
  Key best{PitchClass(0), Mode::Major};
  double best_r = -2.0;
  for (int tonic = 0; tonic < 12; ++tonic) {
    for (Mode mode : {Mode::Major, Mode::Minor}) {
      const double r = correlation(pc_weight, mode == Mode::Major ? kMajorProfile : kMinorProfile, tonic);
      if (r > best_r) {
        best_r = r;
        best = {PitchClass(tonic), mode};
      }
    }
  }
  return best;
}

std::optional<ChordEvent> detectChord(std::span<const int> pitches, Mode mode) {
  if (pitches.empty()) return std::nullopt;
  std::array<bool, 12> has{};
  for (const int p : pitches) has[static_cast<std::size_t>(PitchClass(p).value())] = true;
  const int bass = PitchClass(*std::min_element(pitches.begin(), pitches.end())).value();
  auto present = [&](int pc) { return has[static_cast<std::size_t>(PitchClass(pc).value())]; };

  std::vector<int> roots{bass};
  for (int pc = 0; pc < 12; ++pc) {
    if (pc != bass && has[static_cast<std::size_t>(pc)]) roots.push_back(pc);
  }
  std::optional<ChordEvent> best;
  double best_score = -1.0;
  for (const int r : roots) {
    const double base = (present(r + 7) ? 1.0 : 0.0) + (r == bass ? 0.5 : 0.0);
    const bool maj = present(r + 4);
    const bool min = present(r + 3);
    auto consider = [&](double score, TriadQuality q) {
      if (score > best_score) {
        best_score = score;
        best = ChordEvent{PitchClass(r), q};
      }
    };
    if (maj) consider(base + 2.0, TriadQuality::Major);
    if (min) consider(base + 2.0, TriadQuality::Minor);
    if (!maj && !min) consider(base, mode == Mode::Major ? TriadQuality::Major : TriadQuality::Minor);
  }
  return best;
}

std::optional<Key> keySignature(const smf::MidiFile& file) {
  for (const auto& track : file.tracks) {
    for (const auto& e : track.events) {
      if (e.kind != smf::EventKind::Meta || e.meta_type != 0x59 || e.data.size() < 2) continue;
      const int sharps = static_cast<std::int8_t>(e.data[0]);
      const Mode mode = e.data[1] ? Mode::Minor : Mode::Major;
      const PitchClass major_tonic(sharps * 7);
      return Key{mode == Mode::Major ? major_tonic : major_tonic.shifted(9), mode};
    }
  }
  return std::nullopt;
}

CurationResult curate(const std::filesystem::path& midi_dir, const StyleMap& style_map,
                      const CurationConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(midi_dir)) throw IoError("not a directory: " + midi_dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(midi_dir)) {
    if (entry.is_regular_file() && isMidiFile(entry.path())) files.push_back(fs::relative(entry.path(), midi_dir));
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

  CurationReport report;
  std::vector<Template> kept;
  std::set<std::string> signatures;
  for (const auto& rel : files) {
    ++report.files_scanned;
    smf::MidiFile file;
    try {
      file = smf::readFile(midi_dir / rel);
    } catch (const Error& e) {
      ++report.unreadable;
      report.warnings.push_back(e.what());
      continue;
    }

    std::vector<VoicingNote> notes;
    for (const auto& track : file.tracks) {
      for (const auto& n : smf::extractNotes(track)) {
        if (n.channel == 9) continue;
        const int on = tickToSlot(n.on_tick, file.ticks_per_quarter);
        const int off = tickToSlot(n.off_tick, file.ticks_per_quarter);
        notes.push_back({on, std::max(1, off - on), n.pitch, std::clamp(n.velocity, 1, 127)});
      }
    }
    std::sort(notes.begin(), notes.end());
    const auto analysis = analyzeChordTrack(notes);

    // Pass 1: chord tracks are homophonic and rhythmically plain.
    if (notes.empty() || thinSlotFraction(analysis, config.thin_note_count) > config.thin_slot_fraction) {
      ++report.rejected_melody;
      continue;
    }
    if (ioiEntropy(analysis) > config.ioi_entropy_threshold) {
      ++report.rejected_rhythm;
      continue;
    }
    const int bars = (analysis.slots + kTemplateSlotsPerBar - 1) / kTemplateSlotsPerBar;
    if (bars != 4 && bars != 8) {
      ++report.rejected_length;
      continue;
    }

    // Pass 2: style from the parent directory name.
    const std::string raw = rel.has_parent_path() ? rel.parent_path().filename().string() : "";
    const StyleLabel style = style_map.lookup(raw);
    ++(style_map.contains(raw) ? report.style_mapped : report.style_unknown);

    // Pass 3: canonical key, chord reduction, dedup.
    const Key key = keySignature(file).value_or(detectKey(analysis.pc_weight));
    const int shift = shiftToCanonical(key);
    const int slots = bars * kTemplateSlotsPerBar;
    std::vector<ChordEvent> events(static_cast<std::size_t>(slots));
    std::optional<ChordEvent> current;
    int first_filled = -1;
    for (int s = 0; s < slots; ++s) {
      if (s < analysis.slots) {
        if (auto c = detectChord(analysis.sounding[static_cast<std::size_t>(s)], key.mode)) {
          current = c;
          if (first_filled < 0) first_filled = s;
        }
      }
      if (current) events[static_cast<std::size_t>(s)] = *current;
    }
    for (int s = 0; s < first_filled; ++s) events[static_cast<std::size_t>(s)] = events[static_cast<std::size_t>(first_filled)];

    Template t;
    t.progression = ChordProgression(std::move(events)).transposed(shift);
    t.mode = key.mode;
    t.length_bars = bars;
    t.style = style;
    t.source = rel.generic_string();
    for (auto n : notes) {
      n.pitch += shift;
      if (n.pitch < 0 || n.pitch > 127) continue;
      t.voicing.push_back(n);
    }
    const std::string signature = dedupSignature(t);
    if (!signatures.insert(signature).second) {
      ++report.duplicates_removed;
      continue;
    }
    t.id = templateId(signature, t.mode);
    ++report.kept_by_style[style];
    kept.push_back(std::move(t));
  }
  report.kept = static_cast<int>(kept.size());
  if (kept.empty()) throw DataError("curation produced no templates\n" + report.text());
  return {Library(std::move(kept)), std::move(report)};
}

smf::MidiFile templateToMidi(const Template& t, int ticks_per_quarter) {
  const auto tps = static_cast<std::uint32_t>(ticks_per_quarter / 2);
  std::vector<smf::MidiEvent> events{smf::trackName(0, t.id), smf::timeSignature(0, 4, 4),
                                     {0, smf::EventKind::Meta, 0xFF, 0x59,
                                      {0, static_cast<std::uint8_t>(t.mode == Mode::Minor ? 1 : 0)}}};
  const std::size_t head = events.size();
  for (const auto& n : t.voicing) {
    events.push_back(smf::noteOn(static_cast<std::uint32_t>(n.onset_slot) * tps, 0, n.pitch, n.velocity));
    events.push_back(smf::noteOff(static_cast<std::uint32_t>(n.endSlot()) * tps, 0, n.pitch));
  }
  std::stable_sort(events.begin() + static_cast<std::ptrdiff_t>(head), events.end(),
                   [](const smf::MidiEvent& a, const smf::MidiEvent& b) {
                     if (a.tick != b.tick) return a.tick < b.tick;
                     return a.isNoteOff() && !b.isNoteOff();
                   });
  smf::MidiFile file;
  file.format = 0;
  file.ticks_per_quarter = ticks_per_quarter;
  file.tracks.push_back({std::move(events)});
  return file;
}

}  // namespace accord
