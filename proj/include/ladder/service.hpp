#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace ladder {

// HTTP/JSON facade over on-disk competitions. Writes to one competition
// pass through a single mutex so the mechanism sees a total submission
// order; the event log is the serialization witness.
//
// Endpoints:
//   POST /competitions/{id}/submissions   {"team": ..., "labels": csv-text}
//                                          or {"team": ..., "digest": hex}
//   GET  /competitions/{id}/leaderboard?board=public|private
//   GET  /health
class Service {
 public:
  explicit Service(std::filesystem::path data_dir);
  ~Service();

  void attach(httplib::Server& server);

  // Blocks; serves until the server is stopped.
  bool listen(const std::string& host, int port);

 private:
  struct CompetitionSlot;

  CompetitionSlot* slot(const std::string& id);

  std::filesystem::path data_dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<CompetitionSlot>> slots_;
  std::unique_ptr<httplib::Server> owned_server_;
};

}  // namespace ladder
