/**
 * @file service.hpp
 * @brief Session-based HTTP API for upload, generation, restyle and download.
 *
 *   POST /songs                         multipart: midi, phrases, key, [mode], [meter]
 *   GET  /songs/{id}                    current summary
 *   POST /songs/{id}/generate           {"style", "complexity", "alpha", "beta"} (all optional)
 *   POST /songs/{id}/phrases/{n}/style  {"style"}; n is the 0-based phrase index
 *   POST /songs/{id}/texture            {"complexity"}
 *   GET  /songs/{id}/midi               audio/midi attachment
 *
 * Errors are JSON {"error": "..."} with 400 (bad request), 404 (unknown song
 * or phrase), 409 (not generated yet) or 422 (engine could not satisfy it).
 */
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "accord/arranger.hpp"
#include "accord/harmonizer.hpp"
#include "accord/library.hpp"
#include "accord/midi_io.hpp"

namespace httplib {
class Server;
}

namespace accord::service {

/// Immutable engine inputs shared by every session.
struct EngineData {
  Library library;
  TransitionStats stats;
  TextureLibrary textures;
  MicroLossTable micro_table = consonanceRankTable();
  ArrangerConfig arranger;
  MidiWriteOptions midi;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct Upload {
  std::optional<std::string> midi;  ///< raw file bytes
  std::string phrases;
  std::string key;
  std::string mode;
  std::string meter = "4/4";
};

struct Session {
  std::mutex mutex;
  std::string id;
  AnnotatedMelody melody;
  std::optional<HarmonizationResult> harmonization;
  std::optional<Arrangement> arrangement;
  Complexity complexity = Complexity::Medium;
  std::chrono::steady_clock::time_point last_access;
};

class SongService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SongService(std::shared_ptr<const EngineData> engine,
                       std::chrono::seconds ttl = std::chrono::hours(1), Clock clock = {});

  Response createSong(const Upload& upload);
  Response summary(const std::string& id);
  Response generate(const std::string& id, const std::string& body);
  Response setPhraseStyle(const std::string& id, const std::string& phrase, const std::string& body);
  Response setTexture(const std::string& id, const std::string& body);
  Response midi(const std::string& id);

  /// Drop sessions idle for longer than the TTL; returns how many went.
  std::size_t evictExpired();
  std::size_t sessionCount() const;

 private:
  std::shared_ptr<Session> find(const std::string& id);
  std::string newId();
  std::string summaryJson(const Session& s) const;

  std::shared_ptr<const EngineData> engine_;
  std::chrono::seconds ttl_;
  Clock clock_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

/// Attach the endpoints to an httplib server.
void registerRoutes(httplib::Server& server, SongService& service);

/// Blocking listen. Returns false if the socket could not be bound.
bool serve(SongService& service, const std::string& host, int port);

}  // namespace accord::service
