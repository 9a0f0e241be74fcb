/**
 * @file service.cpp
 * @brief In-memory song sessions behind a small JSON/HTTP API.
 */
#include "accord/service.hpp"

#include <httplib.h>

#include <json.hpp>

#include "accord/error.hpp"

namespace accord::service {

using nlohmann::json;

namespace {

Response jsonResponse(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response errorResponse(int status, const std::string& message) {
  return jsonResponse(status, json{{"error", message}});
}

/// Empty body means "all defaults". @throws DataError on malformed JSON.
json parseBody(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw DataError("request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON body: ") + e.what());
  }
}

StyleFilter styleFilterFrom(const json& j) {
  if (!j.contains("style") || j["style"].is_null()) return std::nullopt;
  std::set<StyleLabel> styles;
  if (j["style"].is_string()) {
    const auto name = j["style"].get<std::string>();
    if (name.empty() || name == "any") return std::nullopt;
    styles.insert(parseStyle(name));
  } else if (j["style"].is_array()) {
    for (const auto& s : j["style"]) {
      if (!s.is_string()) throw DataError("'style' entries must be strings");
      styles.insert(parseStyle(s.get<std::string>()));
    }
  } else {
    throw DataError("'style' must be a string or a list of strings");
  }
  return styles;
}

double numberField(const json& j, const char* name, double fallback) {
  if (!j.contains(name) || j[name].is_null()) return fallback;
  if (!j[name].is_number()) throw DataError(std::string("'") + name + "' must be a number");
  return j[name].get<double>();
}

Complexity complexityField(const json& j, Complexity fallback) {
  if (!j.contains("complexity") || j["complexity"].is_null()) return fallback;
  if (!j["complexity"].is_string()) throw DataError("'complexity' must be a string");
  return parseComplexity(j["complexity"].get<std::string>());
}

}  // namespace

SongService::SongService(std::shared_ptr<const EngineData> engine, std::chrono::seconds ttl, Clock clock)
    : engine_(std::move(engine)), ttl_(ttl), clock_(std::move(clock)), rng_(std::random_device{}()) {
  if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
}

std::string SongService::newId() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t v = rng_();
  std::string id;
  for (int i = 0; i < 16; ++i) {
    id.push_back(kHex[v & 0xF]);
    v >>= 4;
  }
  return id;
}

std::size_t SongService::evictExpired() {
  const auto now = clock_();
  std::lock_guard lock(sessions_mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_access > ttl_) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t SongService::sessionCount() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Session> SongService::find(const std::string& id) {
  evictExpired();
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  return it->second;
}

std::string SongService::summaryJson(const Session& s) const {
  json j;
  j["id"] = s.id;
  j["state"] = s.harmonization ? "generated" : "uploaded";
  j["key"] = keyName(s.melody.key);
  j["meter"] = std::to_string(s.melody.meter.numerator) + "/" + std::to_string(s.melody.meter.denominator);
  j["bars"] = s.melody.totalBars();
  j["complexity"] = complexityName(s.complexity);
  if (s.harmonization && s.arrangement) {
    const json h = resultToJson(*s.harmonization);
    j["alpha"] = h["alpha"];
    j["beta"] = h["beta"];
    j["style_filter"] = h["style_filter"];
    j["total_score"] = h["total_score"];
    j["chords"] = h["chords"];
    j["phrases"] = h["phrases"];
    for (std::size_t i = 0; i < j["phrases"].size(); ++i) {
      j["phrases"][i]["texture_id"] = s.arrangement->texture_ids[i];
    }
    j["texture_ids"] = s.arrangement->texture_ids;
    j["warnings"] = s.arrangement->warnings;
  } else {
    json phrases = json::array();
    for (std::size_t i = 0; i < s.melody.phrases.size(); ++i) {
      const auto& p = s.melody.phrases[i];
      phrases.push_back({{"index", i},
                         {"label", std::string(1, p.label)},
                         {"length_bars", p.length_bars},
                         {"start_bar", p.start_bar}});
    }
    j["phrases"] = std::move(phrases);
  }
  return j.dump();
}

Response SongService::createSong(const Upload& upload) {
  evictExpired();
  if (!upload.midi || upload.midi->empty()) return errorResponse(400, "missing MIDI file (form field 'midi')");
  auto session = std::make_shared<Session>();
  try {
    AnnotationSidecar ann;
    if (upload.phrases.empty()) throw DataError("missing 'phrases'");
    parsePhraseString(upload.phrases);
    ann.phrase_string = upload.phrases;
    if (upload.key.empty()) throw DataError("missing 'key'");
    ann.key = parseKey(upload.key);
    if (!upload.mode.empty()) ann.key.mode = parseMode(upload.mode);
    ann.meter = parseMeter(upload.meter.empty() ? "4/4" : upload.meter);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(upload.midi->data());
    session->melody = parseMelodyMidi(smf::parse({bytes, upload.midi->size()}), ann);
  } catch (const Error& e) {
    return errorResponse(400, e.what());
  }
  session->last_access = clock_();
  std::string id;
  {
    std::lock_guard lock(sessions_mutex_);
    do {
      id = newId();
    } while (sessions_.contains(id));
    session->id = id;
    sessions_[id] = session;
  }
  return jsonResponse(201, json{{"id", id}});
}

Response SongService::summary(const std::string& id) {
  auto s = find(id);
  if (!s) return errorResponse(404, "unknown song " + id);
  std::lock_guard lock(s->mutex);
  s->last_access = clock_();
  return {200, "application/json", summaryJson(*s)};
}

Response SongService::generate(const std::string& id, const std::string& body) {
  auto s = find(id);
  if (!s) return errorResponse(404, "unknown song " + id);
  std::lock_guard lock(s->mutex);
  s->last_access = clock_();

  HarmonizerConfig config;
  config.micro_table = engine_->micro_table;
  Complexity complexity = s->complexity;
  try {
    const json j = parseBody(body);
    config.style_filter = styleFilterFrom(j);
    config.alpha = numberField(j, "alpha", config.alpha);
    config.beta = numberField(j, "beta", config.beta);
    config.validate();
    complexity = complexityField(j, complexity);
  } catch (const Error& e) {
    return errorResponse(400, e.what());
  }
  try {
    auto result = harmonize(s->melody, engine_->library, engine_->stats, config);
    auto arrangement = accord::arrange(s->melody, result, engine_->textures, complexity, engine_->arranger);
    s->harmonization = std::move(result);
    s->arrangement = std::move(arrangement);
    s->complexity = complexity;
  } catch (const Error& e) {
    return errorResponse(422, e.what());
  }
  return {200, "application/json", summaryJson(*s)};
}

Response SongService::setPhraseStyle(const std::string& id, const std::string& phrase, const std::string& body) {
  auto s = find(id);
  if (!s) return errorResponse(404, "unknown song " + id);
  std::lock_guard lock(s->mutex);
  s->last_access = clock_();

  std::size_t index = 0;
  try {
    std::size_t used = 0;
    const long v = std::stol(phrase, &used);
    if (used != phrase.size() || v < 0) throw std::invalid_argument(phrase);
    index = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    return errorResponse(404, "no phrase '" + phrase + "'");
  }
  if (index >= s->melody.phrases.size()) {
    return errorResponse(404, "phrase " + phrase + " out of range (song has " +
                                  std::to_string(s->melody.phrases.size()) + " phrases)");
  }
  if (!s->harmonization) return errorResponse(409, "song has not been generated yet");

  StyleLabel style{};
  try {
    const json j = parseBody(body);
    if (!j.contains("style") || !j["style"].is_string()) throw DataError("body must contain a 'style' string");
    style = parseStyle(j["style"].get<std::string>());
  } catch (const Error& e) {
    return errorResponse(400, e.what());
  }
  try {
    auto result = selectStyle(*s->harmonization, index, style);
    auto arrangement = rearrangePhrase(*s->arrangement, result, engine_->textures, index);
    s->harmonization = std::move(result);
    s->arrangement = std::move(arrangement);
  } catch (const Error& e) {
    return errorResponse(422, e.what());
  }
  return {200, "application/json", summaryJson(*s)};
}

Response SongService::setTexture(const std::string& id, const std::string& body) {
  auto s = find(id);
  if (!s) return errorResponse(404, "unknown song " + id);
  std::lock_guard lock(s->mutex);
  s->last_access = clock_();

  Complexity complexity{};
  try {
    const json j = parseBody(body);
    if (!j.contains("complexity")) throw DataError("body must contain 'complexity'");
    complexity = complexityField(j, s->complexity);
  } catch (const Error& e) {
    return errorResponse(400, e.what());
  }
  if (!s->harmonization) return errorResponse(409, "song has not been generated yet");
  try {
    s->arrangement = accord::arrange(s->melody, *s->harmonization, engine_->textures, complexity, engine_->arranger);
    s->complexity = complexity;
  } catch (const Error& e) {
    return errorResponse(422, e.what());
  }
  return {200, "application/json", summaryJson(*s)};
}

Response SongService::midi(const std::string& id) {
  auto s = find(id);
  if (!s) return errorResponse(404, "unknown song " + id);
  std::lock_guard lock(s->mutex);
  s->last_access = clock_();
  if (!s->arrangement) return errorResponse(409, "song has not been generated yet");
  const auto bytes = arrangementMidiBytes(*s->arrangement, engine_->midi);
  return {200, "audio/midi", std::string(bytes.begin(), bytes.end())};
}

void registerRoutes(httplib::Server& server, SongService& service) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };

  server.Post("/songs", [&service, send](const httplib::Request& req, httplib::Response& res) {
    Upload up;
    auto field = [&](const char* name) -> std::optional<std::string> {
      if (req.has_file(name)) return req.get_file_value(name).content;
      if (req.has_param(name)) return req.get_param_value(name);
      return std::nullopt;
    };
    up.midi = field("midi");
    if (!up.midi) up.midi = field("file");
    up.phrases = field("phrases").value_or(field("phrase_string").value_or(""));
    up.key = field("key").value_or("");
    up.mode = field("mode").value_or("");
    up.meter = field("meter").value_or("4/4");
    send(res, service.createSong(up));
  });
  server.Get(R"(/songs/([0-9a-f]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.summary(req.matches[1]));
  });
  server.Post(R"(/songs/([0-9a-f]+)/generate)", [&service, send](const httplib::Request& req,
                                                                  httplib::Response& res) {
    send(res, service.generate(req.matches[1], req.body));
  });
  server.Post(R"(/songs/([0-9a-f]+)/phrases/([^/]+)/style)",
              [&service, send](const httplib::Request& req, httplib::Response& res) {
                send(res, service.setPhraseStyle(req.matches[1], req.matches[2], req.body));
              });
  server.Post(R"(/songs/([0-9a-f]+)/texture)", [&service, send](const httplib::Request& req,
                                                                 httplib::Response& res) {
    send(res, service.setTexture(req.matches[1], req.body));
  });
  server.Get(R"(/songs/([0-9a-f]+)/midi)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.midi(req.matches[1]);
    send(res, r);
    if (r.status == 200) res.set_header("Content-Disposition", "attachment; filename=\"arrangement.mid\"");
  });
}

bool serve(SongService& service, const std::string& host, int port) {
  httplib::Server server;
  registerRoutes(server, service);
  return server.listen(host, port);
}

}  // namespace accord::service
