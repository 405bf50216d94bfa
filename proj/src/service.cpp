#include "ladder/service.hpp"

#include "ladder/competition.hpp"

// httplib pulls in glibc network headers whose `_res` macro breaks Eigen;
// keep it after every Eigen-dependent include.
#include <httplib.h>

#include <chrono>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ladder {

struct Service::CompetitionSlot {
  std::mutex mutex;  // single writer per competition
  std::unique_ptr<Competition> competition;
};

Service::Service(fs::path data_dir) : data_dir_(std::move(data_dir)) {}
Service::~Service() = default;

Service::CompetitionSlot* Service::slot(const std::string& id) {
  std::lock_guard lock(map_mutex_);
  auto it = slots_.find(id);
  if (it != slots_.end()) return it->second.get();
  const fs::path dir = data_dir_ / id;
  if (!fs::exists(dir / "spec.json")) return nullptr;
  auto s = std::make_unique<CompetitionSlot>();
  s->competition = std::make_unique<Competition>(Competition::open(dir));
  return slots_.emplace(id, std::move(s)).first->second.get();
}

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& msg) {
  reply_json(res, status, json{{"error", msg}});
}

json board_json(const std::vector<LeaderboardEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries)
    out.push_back({{"rank", e.rank},
                   {"team", e.team},
                   {"score", e.score},
                   {"submissions", e.submissions}});
  return out;
}

long wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void Service::attach(httplib::Server& server) {
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, json{{"ok", true}});
  });

  server.Post(
      R"(/competitions/([^/]+)/submissions)",
      [this](const httplib::Request& req, httplib::Response& res) {
        auto* s = slot(req.matches[1]);
        if (!s) return reply_error(res, 404, "unknown competition");

        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::exception& e) {
          return reply_error(res, 400, std::string("bad JSON: ") + e.what());
        }
        if (!body.contains("team") || !body.at("team").is_string())
          return reply_error(res, 400, "missing team id");
        const bool has_labels = body.contains("labels");
        const bool has_digest = body.contains("digest");
        if (has_labels == has_digest)
          return reply_error(res, 400,
                             "exactly one of labels / digest required");

        std::lock_guard lock(s->mutex);
        Competition& comp = *s->competition;
        try {
          LabelVector labels;
          if (has_labels) {
            labels = parse_submission_file(body.at("labels").get<std::string>(),
                                           comp.spec().n_total,
                                           comp.spec().alphabet);
          } else {
            BlobStore blobs(comp.dir() / "blobs");
            labels = labels_from_canonical(
                blobs.get(body.at("digest").get<std::string>()));
          }
          const auto result = comp.submit(body.at("team").get<std::string>(),
                                          labels, wall_clock_ms());
          reply_json(res, 200,
                     json{{"score", result.score},
                          {"seq", result.seq},
                          {"digest", result.digest},
                          {"mechanism", to_string(comp.spec().mechanism.kind)}});
        } catch (const ParseError& e) {
          reply_error(res, 400, e.what());
        } catch (const std::invalid_argument& e) {
          reply_error(res, 400, e.what());
        } catch (const std::exception& e) {
          reply_error(res, 500, e.what());
        }
      });

  server.Get(
      R"(/competitions/([^/]+)/leaderboard)",
      [this](const httplib::Request& req, httplib::Response& res) {
        auto* s = slot(req.matches[1]);
        if (!s) return reply_error(res, 404, "unknown competition");
        const std::string board = req.get_param_value("board").empty()
                                      ? "public"
                                      : req.get_param_value("board");
        std::lock_guard lock(s->mutex);
        const Competition& comp = *s->competition;
        if (board == "public")
          return reply_json(res, 200, board_json(comp.public_board()));
        if (board == "private") {
          if (!comp.spec().closed)
            return reply_error(res, 403,
                               "private board is sealed until the competition closes");
          return reply_json(res, 200, board_json(comp.private_board()));
        }
        reply_error(res, 400, "board must be public or private");
      });
}

bool Service::listen(const std::string& host, int port) {
  owned_server_ = std::make_unique<httplib::Server>();
  attach(*owned_server_);
  return owned_server_->listen(host, port);
}

}  // namespace ladder
