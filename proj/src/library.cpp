/**
 * @file library.cpp
 * @brief Template records, library loading, dedup signatures and transition counts.
 */
#include "accord/library.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "accord/error.hpp"

namespace accord {

using nlohmann::json;

std::string_view styleName(StyleLabel style) {
  switch (style) {
    case StyleLabel::PopStandard: return "pop_standard";
    case StyleLabel::PopComplex: return "pop_complex";
    case StyleLabel::Dark: return "dark";
    case StyleLabel::RnB: return "rnb";
    case StyleLabel::Unknown: return "unknown";
  }
  return "unknown";
}

StyleLabel parseStyle(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (c == '-' || c == ' ') c = '_';
    t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (t == "r&b") t = "rnb";
  for (StyleLabel s : kAllStyles) {
    if (styleName(s) == t) return s;
  }
  throw DataError("unknown style '" + std::string(text) + "'");
}

void Template::validate() const {
  if (id.empty()) throw DataError("template id is empty");
  if (length_bars != 4 && length_bars != 8) {
    throw DataError("template " + id + ": length_bars must be 4 or 8, got " +
                    std::to_string(length_bars));
  }
  if (progression.bars() != length_bars) {
    throw DataError("template " + id + ": chords cover " + std::to_string(progression.slots()) +
                    " slots, expected " + std::to_string(length_bars * kTemplateSlotsPerBar));
  }
  const int span = length_bars * kTemplateSlotsPerBar;
  for (const auto& v : voicing) {
    if (v.onset_slot < 0 || v.duration_slots < 1 || v.endSlot() > span) {
      throw DataError("template " + id + ": voicing note outside the template bars");
    }
    if (v.pitch < 0 || v.pitch > 127) throw DataError("template " + id + ": voicing pitch out of range");
    if (v.velocity < 1 || v.velocity > 127) {
      throw DataError("template " + id + ": voicing velocity out of range");
    }
  }
}

Library::Library(std::vector<Template> templates) : templates_(std::move(templates)) {
  if (templates_.empty()) throw DataError("empty library");
  std::unordered_map<std::string, std::string> signatures;
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    const auto& t = templates_[i];
    t.validate();
    if (!by_id_.emplace(t.id, i).second) throw DataError("duplicate template id " + t.id);
    auto [it, fresh] = signatures.emplace(dedupSignature(t), t.id);
    if (!fresh) throw DataError("templates " + it->second + " and " + t.id + " are transposed duplicates");
  }
}

const Template* Library::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &templates_[it->second];
}

std::string dedupSignature(const ChordProgression& progression, Mode mode) {
  std::string sig = mode == Mode::Major ? "M" : "m";
  sig += std::to_string(progression.slots());
  sig += ':';
  if (progression.empty()) return sig;
  const PitchClass first = progression[0].root;
  for (const auto& e : progression.events()) {
    const int rel = intervalPc(first, e.root);
    sig += static_cast<char>(rel < 10 ? '0' + rel : 'a' + rel - 10);
    sig += e.quality == TriadQuality::Major ? 'M' : 'm';
  }
  return sig;
}

std::string dedupSignature(const Template& t) { return dedupSignature(t.progression, t.mode); }

std::string templateToJsonLine(const Template& t) {
  json chords = json::array();
  for (const auto& e : t.progression.events()) {
    chords.push_back({e.root.value(), e.quality == TriadQuality::Major ? "maj" : "min"});
  }
  json voicing = json::array();
  for (const auto& v : t.voicing) voicing.push_back({v.onset_slot, v.duration_slots, v.pitch, v.velocity});
  json j;
  j["id"] = t.id;
  j["style"] = styleName(t.style);
  j["mode"] = modeName(t.mode);
  j["length_bars"] = t.length_bars;
  j["chords"] = std::move(chords);
  j["voicing"] = std::move(voicing);
  j["source"] = t.source;
  return j.dump();
}

namespace {

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw DataError(std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T typed(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

Template templateFromJsonLine(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("record is not an object");
  Template t;
  t.id = typed<std::string>(j, "id");
  try {
    t.style = parseStyle(typed<std::string>(j, "style"));
    t.mode = parseMode(typed<std::string>(j, "mode"));
  } catch (const DataError& e) {
    throw DataError(std::string("field 'style'/'mode': ") + e.what());
  }
  t.length_bars = typed<int>(j, "length_bars");
  if (t.length_bars != 4 && t.length_bars != 8) {
    throw DataError("field 'length_bars': must be 4 or 8, got " + std::to_string(t.length_bars));
  }
  std::vector<ChordEvent> events;
  for (const auto& c : field(j, "chords")) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_string()) {
      throw DataError("field 'chords': each entry must be [root, \"maj\"|\"min\"]");
    }
    const int root = c[0].get<int>();
    const auto q = c[1].get<std::string>();
    if (root < 0 || root > 11 || (q != "maj" && q != "min")) {
      throw DataError("field 'chords': bad chord entry " + c.dump());
    }
    events.push_back({PitchClass(root), q == "maj" ? TriadQuality::Major : TriadQuality::Minor});
  }
  try {
    t.progression = ChordProgression(std::move(events));
  } catch (const DataError& e) {
    throw DataError(std::string("field 'chords': ") + e.what());
  }
  for (const auto& v : field(j, "voicing")) {
    if (!v.is_array() || v.size() != 4) throw DataError("field 'voicing': entries must be [onset, duration, pitch, velocity]");
    try {
      t.voicing.push_back({v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()});
    } catch (const json::exception&) {
      throw DataError("field 'voicing': non-integer entry " + v.dump());
    }
  }
  if (j.contains("source")) t.source = typed<std::string>(j, "source");
  t.validate();
  return t;
}

Library loadLibrary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open library " + path.string());
  std::vector<Template> templates;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      templates.push_back(templateFromJsonLine(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (templates.empty()) throw DataError("empty library: " + path.string());
  return Library(std::move(templates));
}

void saveLibrary(const Library& lib, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : lib.templates()) out << templateToJsonLine(t) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::string windowKey(std::span<const ChordEvent> events) {
  std::string key;
  key.reserve(events.size());
  for (const auto& e : events) {
    key += static_cast<char>(e.root.value() * 2 + (e.quality == TriadQuality::Minor ? 1 : 0));
  }
  return key;
}

long TransitionStats::count(std::span<const ChordEvent> last_bar,
                            std::span<const ChordEvent> first_bar) const {
  std::string key = windowKey(last_bar);
  key += windowKey(first_bar);
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

TransitionStats buildTransitionStats(const Library& lib) {
  std::unordered_map<std::string, long> counts;
  for (const auto& t : lib.templates()) {
    const auto events = t.progression.events();
    for (int b = 0; b + 1 < t.progression.bars(); ++b) {
      ++counts[windowKey(events.subspan(static_cast<std::size_t>(b) * kTemplateSlotsPerBar,
                                        2 * kTemplateSlotsPerBar))];
    }
  }
  return TransitionStats(std::move(counts), lib.size());
}

double transitionLossFromCount(long count, std::size_t library_size) {
  if (library_size < 2) throw PreconditionError("transition loss needs a library of at least 2 templates");
  const double n = static_cast<double>(library_size);
  if (count <= 0) return 2.0;  // c = 1/N, exactly
  const double t = 1.0 - std::log(static_cast<double>(count)) / std::log(n);
  return std::clamp(t, 0.0, 2.0);
}

double transitionLoss(const TransitionStats& stats, std::span<const ChordEvent> last_bar,
                      std::span<const ChordEvent> first_bar) {
  return transitionLossFromCount(stats.count(last_bar, first_bar), stats.librarySize());
}

}  // namespace accord
