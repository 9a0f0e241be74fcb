/**
 * @file cli.cpp
 * @brief Subcommand wiring and error-to-exit-code mapping.
 */
#include "accord/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include <json.hpp>

#include "accord/arranger.hpp"
#include "accord/curation.hpp"
#include "accord/error.hpp"
#include "accord/harmonizer.hpp"
#include "accord/midi_io.hpp"
#include "accord/service.hpp"

#ifndef ACCORD_DATA_DIR
#define ACCORD_DATA_DIR "data"
#endif

namespace accord::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// An explicitly given path must not be empty.
const CLI::Validator kPath([](std::string& v) { return v.empty() ? std::string("path must not be empty") : std::string(); },
                           "PATH");

struct Defaults {
  std::string library;
  std::string textures;
  std::string micro_table;
  double alpha = 0.1;
  double beta = 0.5;
  double tempo_bpm = 120.0;
};

std::string envOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

Defaults loadDefaults(const std::string& config_path) {
  Defaults d;
  d.library = envOr("ACCORD_LIBRARY", std::string(ACCORD_DATA_DIR) + "/seed_library.jsonl");
  d.textures = envOr("ACCORD_TEXTURES", std::string(ACCORD_DATA_DIR) + "/textures.jsonl");
  if (config_path.empty()) return d;
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot open config " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("config " + config_path + ": " + e.what());
  }
  try {
    d.library = j.value("library", d.library);
    d.textures = j.value("textures", d.textures);
    d.micro_table = j.value("micro_table", d.micro_table);
    d.alpha = j.value("alpha", d.alpha);
    d.beta = j.value("beta", d.beta);
    d.tempo_bpm = j.value("tempo_bpm", d.tempo_bpm);
  } catch (const json::type_error& e) {
    throw DataError("config " + config_path + ": " + e.what());
  }
  return d;
}

struct MelodyArgs {
  std::string melody;
  std::string annotation;
  std::string phrases;
  std::string key;
  std::string mode;
  std::string meter = "4/4";

  void attach(CLI::App* app) {
    app->add_option("--melody", melody, "Melody MIDI file")->required()->check(kPath);
    app->add_option("--annotation", annotation, "Sidecar with phrases/key/meter (default: <melody>.ann)")->check(kPath);
    app->add_option("--phrases", phrases, "Phrase string, e.g. A8A8B8");
    app->add_option("--key", key, "Key, e.g. \"G major\" or G");
    app->add_option("--mode", mode, "major | minor");
    app->add_option("--meter", meter, "4/4 | 2/4");
  }

  AnnotatedMelody load() const {
    AnnotationSidecar ann;
    if (!phrases.empty()) {
      if (key.empty()) throw DataError("--phrases needs --key");
      parsePhraseString(phrases);
      ann.phrase_string = phrases;
      ann.key = parseKey(key);
      ann.meter = parseMeter(meter);
    } else {
      fs::path sidecar = annotation.empty() ? fs::path(melody).replace_extension(".ann") : fs::path(annotation);
      ann = loadSidecar(sidecar);
      if (!key.empty()) ann.key = parseKey(key);
    }
    if (!mode.empty()) ann.key.mode = parseMode(mode);
    return parseMelodyMidiFile(melody, ann);
  }
};

struct EngineArgs {
  std::string library;
  std::string micro_table;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::vector<std::string> styles;

  void attach(CLI::App* app) {
    app->add_option("--library", library, "Template library (.jsonl)")->check(kPath);
    app->add_option("--micro-table", micro_table, "Micro-loss table (.json)")->check(kPath);
    app->add_option("--alpha", alpha, "Inter-phrase weight, default 0.1")->check(CLI::Range(0.0, 1.0));
    app->add_option("--beta", beta, "Melody-fit weight, default 0.5")->check(CLI::Range(0.0, 1.0));
    app->add_option("--style", styles, "Restrict to style(s): pop_standard, pop_complex, dark, rnb, unknown");
  }

  HarmonizerConfig config(const Defaults& d) const {
    HarmonizerConfig c;
    c.alpha = alpha.value_or(d.alpha);
    c.beta = beta.value_or(d.beta);
    const std::string table = micro_table.empty() ? d.micro_table : micro_table;
    if (!table.empty()) c.micro_table = loadMicroTable(table);
    if (!styles.empty()) {
      std::set<StyleLabel> s;
      for (const auto& name : styles) s.insert(parseStyle(name));
      c.style_filter = std::move(s);
    }
    c.validate();
    return c;
  }

  Library loadLib(const Defaults& d) const { return loadLibrary(library.empty() ? d.library : library); }
};

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void writeBytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void printStats(const Library& lib, std::ostream& out) {
  std::map<int, int> by_length;
  std::map<StyleLabel, std::array<int, 2>> table;
  for (const auto& t : lib.templates()) {
    ++by_length[t.length_bars];
    ++table[t.style][t.mode == Mode::Major ? 0 : 1];
  }
  out << "templates: " << lib.size() << "\n";
  out << "length:";
  for (const auto& [bars, n] : by_length) out << " " << bars << " bars " << n << ";";
  out << "\n\n" << std::left << std::setw(14) << "style" << std::right << std::setw(7) << "major" << std::setw(7)
      << "minor" << std::setw(7) << "total" << "\n";
  std::array<int, 2> totals{};
  for (StyleLabel s : kAllStyles) {
    const auto row = table[s];
    totals[0] += row[0];
    totals[1] += row[1];
    out << std::left << std::setw(14) << styleName(s) << std::right << std::setw(7) << row[0] << std::setw(7)
        << row[1] << std::setw(7) << row[0] + row[1] << "\n";
  }
  out << std::left << std::setw(14) << "total" << std::right << std::setw(7) << totals[0] << std::setw(7)
      << totals[1] << std::setw(7) << totals[0] + totals[1] << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phrase-level melody harmonization and piano accompaniment arrangement"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with default paths and weights")->check(kPath);

  // curate
  auto* curate_cmd = app.add_subcommand("curate", "Build a template library from a MIDI corpus");
  std::string midi_dir, style_map, curate_out, report_path;
  CurationConfig curation;
  curate_cmd->add_option("--midi-dir", midi_dir, "Corpus directory; subdirectory names are raw style labels")
      ->required();
  curate_cmd->add_option("--style-map", style_map, "raw label = style mapping")->required()->check(CLI::ExistingFile);
  curate_cmd->add_option("--out", curate_out, "Output library (.jsonl)")->required()->check(kPath);
  curate_cmd->add_option("--report", report_path, "Write the curation report here as well")->check(kPath);
  curate_cmd->add_option("--thin-fraction", curation.thin_slot_fraction, "Melody filter threshold")
      ->check(CLI::Range(0.0, 1.0));
  curate_cmd->add_option("--ioi-entropy", curation.ioi_entropy_threshold, "Rhythm filter threshold (bits)");

  // harmonize
  auto* harm_cmd = app.add_subcommand("harmonize", "Harmonize a phrase-annotated melody");
  MelodyArgs harm_melody;
  EngineArgs harm_engine;
  std::string harm_out, harm_midi;
  harm_melody.attach(harm_cmd);
  harm_engine.attach(harm_cmd);
  harm_cmd->add_option("--out", harm_out, "Result JSON")->required()->check(kPath);
  harm_cmd->add_option("--midi", harm_midi, "Lead-sheet MIDI (default: --out with .mid)")->check(kPath);

  // arrange
  auto* arr_cmd = app.add_subcommand("arrange", "Harmonize and arrange a piano accompaniment");
  MelodyArgs arr_melody;
  EngineArgs arr_engine;
  std::string textures_path, complexity_name = "medium", arr_out, arr_json;
  std::optional<double> tempo;
  arr_melody.attach(arr_cmd);
  arr_engine.attach(arr_cmd);
  arr_cmd->add_option("--textures", textures_path, "Texture library (.jsonl)")->check(kPath);
  arr_cmd->add_option("--complexity", complexity_name, "sparse | medium | dense")
      ->check(CLI::IsMember({"sparse", "medium", "dense"}));
  arr_cmd->add_option("--out", arr_out, "Two-track MIDI output")->required()->check(kPath);
  arr_cmd->add_option("--json", arr_json, "Also write the harmonization result JSON")->check(kPath);
  arr_cmd->add_option("--tempo", tempo, "Tempo in BPM, default 120")->check(CLI::PositiveNumber);

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Template counts by length, style and mode");
  std::string stats_lib;
  stats_cmd->add_option("--library", stats_lib, "Template library (.jsonl)")->check(kPath);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  EngineArgs serve_engine;
  std::string serve_textures, host = envOr("ACCORD_HOST", "127.0.0.1");
  int port = std::atoi(envOr("ACCORD_PORT", "8080").c_str());
  int ttl = 3600;
  serve_cmd->add_option("--library", serve_engine.library, "Template library (.jsonl)")->check(kPath);
  serve_cmd->add_option("--micro-table", serve_engine.micro_table, "Micro-loss table (.json)")->check(kPath);
  serve_cmd->add_option("--textures", serve_textures, "Texture library (.jsonl)")->check(kPath);
  serve_cmd->add_option("--host", host, "Listen address (ACCORD_HOST)");
  serve_cmd->add_option("--port", port, "Listen port (ACCORD_PORT)")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--ttl", ttl, "Session idle lifetime in seconds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Defaults defaults = loadDefaults(config_path);

    if (*curate_cmd) {
      const auto result = curate(midi_dir, loadStyleMap(style_map), curation);
      saveLibrary(result.library, curate_out);
      if (!report_path.empty()) writeText(report_path, result.report.text());
      out << result.report.text();
      return kExitOk;
    }

    if (*harm_cmd) {
      const auto melody = harm_melody.load();
      const auto config = harm_engine.config(defaults);
      const auto lib = harm_engine.loadLib(defaults);
      const auto result = harmonize(melody, lib, buildTransitionStats(lib), config);
      writeText(harm_out, resultToJson(result).dump(2) + "\n");
      const fs::path midi_path = harm_midi.empty() ? fs::path(harm_out).replace_extension(".mid") : fs::path(harm_midi);
      MidiWriteOptions opts;
      opts.tempo_bpm = defaults.tempo_bpm;
      writeBytes(midi_path, leadSheetMidiBytes(melody, result, opts));
      for (const auto& c : result.choices) {
        out << "phrase " << c.phrase_index << " (" << c.phrase.label << c.phrase.length_bars << "): " << c.identity
            << "  [" << c.rendering().id << "]\n";
      }
      out << "total score: " << result.total_score << "\n";
      return kExitOk;
    }

    if (*arr_cmd) {
      const auto melody = arr_melody.load();
      const auto config = arr_engine.config(defaults);
      const auto lib = arr_engine.loadLib(defaults);
      const auto textures = loadTextureLibrary(textures_path.empty() ? defaults.textures : textures_path);
      const auto result = harmonize(melody, lib, buildTransitionStats(lib), config);
      const auto arrangement = arrange(melody, result, textures, parseComplexity(complexity_name));
      MidiWriteOptions opts;
      opts.tempo_bpm = tempo.value_or(defaults.tempo_bpm);
      writeArrangementMidi(arrangement, arr_out, opts);
      if (!arr_json.empty()) writeText(arr_json, resultToJson(result).dump(2) + "\n");
      for (std::size_t i = 0; i < arrangement.texture_ids.size(); ++i) {
        out << "phrase " << i << ": " << result.choices[i].identity << "  texture " << arrangement.texture_ids[i]
            << "\n";
      }
      for (const auto& w : arrangement.warnings) err << "warning: " << w << "\n";
      return kExitOk;
    }

    if (*stats_cmd) {
      printStats(loadLibrary(stats_lib.empty() ? defaults.library : stats_lib), out);
      return kExitOk;
    }

    if (*serve_cmd) {
      auto engine = std::make_shared<service::EngineData>();
      engine->library = serve_engine.loadLib(defaults);
      engine->stats = buildTransitionStats(engine->library);
      engine->textures = loadTextureLibrary(serve_textures.empty() ? defaults.textures : serve_textures);
      engine->micro_table = serve_engine.config(defaults).micro_table;
      engine->midi.tempo_bpm = defaults.tempo_bpm;
      service::SongService svc(engine, std::chrono::seconds(ttl));
      out << "listening on " << host << ":" << port << std::endl;
      if (!service::serve(svc, host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace accord::cli
