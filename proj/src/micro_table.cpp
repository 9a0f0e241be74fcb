/**
 * @file micro_table.cpp
 * @brief Dissonance table construction and (de)serialization.
 */
#include "accord/micro_table.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "accord/error.hpp"

namespace accord {

using nlohmann::json;

void MicroLossTable::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const Matrix* m : {&major, &minor}) {
    for (const auto& row : *m) {
      if (!std::all_of(row.begin(), row.end(), in_unit)) throw DataError("micro-loss entry outside [0, 1]");
    }
  }
  if (!in_unit(non_diatonic_penalty)) throw DataError("non_diatonic_penalty outside [0, 1]");
}

MicroLossTable consonanceRankTable() {
  // Indexed by interval of melody above chord root.
  constexpr std::array<double, 12> kByInterval = {0.0,  0.7,  0.5, 0.25, 0.25, 0.15,
                                                  0.9,  0.1,  0.35, 0.35, 0.5,  0.7};
  MicroLossTable table;
  for (Mode mode : {Mode::Major, Mode::Minor}) {
    auto& m = mode == Mode::Major ? table.major : table.minor;
    const auto steps = scaleSteps(mode);
    for (int d = 0; d < 7; ++d) {
      for (int col = 0; col < 12; ++col) {
        const int above_root = PitchClass(col - steps[static_cast<std::size_t>(d)]).value();
        double v = kByInterval[static_cast<std::size_t>(above_root)];
        const bool chord_tone = above_root == 0 || above_root == 3 || above_root == 4 || above_root == 7;
        if (mode == Mode::Minor && (d == 4 || d == 6) && !chord_tone) v = std::min(1.0, v + 0.1);
        m[static_cast<std::size_t>(d)][static_cast<std::size_t>(col)] = v;
      }
    }
  }
  table.non_diatonic_penalty = 0.6;
  return table;
}

namespace {

MicroLossTable::Matrix matrixFrom(const json& j, const char* name) {
  MicroLossTable::Matrix m{};
  if (!j.contains(name) || !j[name].is_array() || j[name].size() != 7) {
    throw DataError(std::string("micro table: '") + name + "' must be a 7x12 matrix");
  }
  for (std::size_t r = 0; r < 7; ++r) {
    const auto& row = j[name][r];
    if (!row.is_array() || row.size() != 12) {
      throw DataError(std::string("micro table: '") + name + "' row " + std::to_string(r + 1) +
                      " must have 12 entries");
    }
    for (std::size_t c = 0; c < 12; ++c) {
      if (!row[c].is_number()) throw DataError("micro table: non-numeric entry");
      m[r][c] = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

MicroLossTable loadMicroTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open micro-loss table " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("micro table " + path.string() + ": " + e.what());
  }
  MicroLossTable t;
  t.major = matrixFrom(j, "major");
  t.minor = matrixFrom(j, "minor");
  if (!j.contains("non_diatonic_penalty") || !j["non_diatonic_penalty"].is_number()) {
    throw DataError("micro table: missing non_diatonic_penalty");
  }
  t.non_diatonic_penalty = j["non_diatonic_penalty"].get<double>();
  t.validate();
  return t;
}

void saveMicroTable(const MicroLossTable& table, const std::filesystem::path& path) {
  json j;
  j["major"] = table.major;
  j["minor"] = table.minor;
  j["non_diatonic_penalty"] = table.non_diatonic_penalty;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

}  // namespace accord
