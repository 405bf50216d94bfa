#include <doctest.h>

#include "ladder/competition.hpp"
#include "ladder/rng.hpp"
#include "ladder/service.hpp"

// httplib pulls in glibc network headers whose `_res` macro breaks Eigen;
// keep it after every Eigen-dependent include.
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <json.hpp>
#include <thread>
#include <vector>

using namespace ladder;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TestServer {
  fs::path data_dir;
  Service service;
  httplib::Server server;
  int port = 0;
  std::thread thread;

  explicit TestServer(const fs::path& dir) : data_dir(dir), service(dir) {
    service.attach(server);
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

fs::path make_competition(const std::string& tag, long n, const char* mech) {
  const fs::path root = fs::temp_directory_path() / ("ladder_svc_" + tag);
  fs::remove_all(root);
  fs::create_directories(root);

  CompetitionSpec spec;
  spec.id = "comp";
  spec.alphabet = {0.0, 1.0};
  spec.n_total = n;
  std::tie(spec.public_idx, spec.private_idx) = split_assign(n, 0.5, 1);
  spec.mechanism = MechanismSpec::parse(mech, 0, 1e-5);

  Rng rng(2);
  LabelVector truth(static_cast<std::size_t>(n));
  for (auto& y : truth) y = static_cast<double>(rng.bit());
  Competition::create(root / "comp", spec, truth);
  return root;
}

std::string random_submission(Rng& rng, long n) {
  std::string csv;
  for (long i = 0; i < n; ++i) {
    csv += rng.bit() ? '1' : '0';
    csv += '\n';
  }
  return csv;
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("health, submission, and leaderboard endpoints") {
  const fs::path root = make_competition("basic", 40, "ladder-pf");
  TestServer ts(root);
  auto client = ts.client();

  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  Rng rng(9);
  const json body{{"team", "alpha"}, {"labels", random_submission(rng, 40)}};
  auto res = client.Post("/competitions/comp/submissions", body.dump(),
                         "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json reply = json::parse(res->body);
  CHECK(reply.at("seq") == 1);
  CHECK(reply.at("mechanism") == "ladder-pf");
  CHECK(on_grid(reply.at("score").get<double>(), 1.0 / 20.0));

  auto lb = client.Get("/competitions/comp/leaderboard");
  REQUIRE(lb);
  REQUIRE(lb->status == 200);
  const json board = json::parse(lb->body);
  REQUIRE(board.size() == 1);
  CHECK(board[0].at("team") == "alpha");
  CHECK(board[0].at("rank") == 1);
  CHECK(board[0].at("score") == reply.at("score"));  // no transformation
}

TEST_CASE("error statuses") {
  const fs::path root = make_competition("errors", 20, "ladder-pf");
  TestServer ts(root);
  auto client = ts.client();

  CHECK(client.Get("/competitions/nope/leaderboard")->status == 404);
  CHECK(client.Post("/competitions/nope/submissions", "{}",
                    "application/json")
            ->status == 404);

  auto bad_json = client.Post("/competitions/comp/submissions", "not json",
                              "application/json");
  CHECK(bad_json->status == 400);

  const json no_payload{{"team", "a"}};
  CHECK(client.Post("/competitions/comp/submissions", no_payload.dump(),
                    "application/json")
            ->status == 400);

  const json both{{"team", "a"}, {"labels", "0\n"}, {"digest", "ff"}};
  CHECK(client.Post("/competitions/comp/submissions", both.dump(),
                    "application/json")
            ->status == 400);

  // Malformed CSV: diagnostics name the offending line.
  const json short_file{{"team", "a"}, {"labels", "1\n0\n"}};
  auto res = client.Post("/competitions/comp/submissions", short_file.dump(),
                         "application/json");
  CHECK(res->status == 400);
  CHECK(json::parse(res->body).at("error").get<std::string>().find("line") !=
        std::string::npos);

  CHECK(client.Get("/competitions/comp/leaderboard?board=private")->status ==
        403);
  CHECK(client.Get("/competitions/comp/leaderboard?board=weird")->status ==
        400);
}

TEST_CASE("private board unlocks once the competition closes") {
  const fs::path root = make_competition("closing", 20, "kaggle");
  Rng rng(4);
  {
    TestServer ts(root);
    auto client = ts.client();
    const json body{{"team", "a"}, {"labels", random_submission(rng, 20)}};
    REQUIRE(client.Post("/competitions/comp/submissions", body.dump(),
                        "application/json")
                ->status == 200);
    CHECK(client.Get("/competitions/comp/leaderboard?board=private")->status ==
          403);
  }
  {
    Competition comp = Competition::open(root / "comp");
    comp.close();
  }
  TestServer ts(root);
  auto client = ts.client();
  auto res = client.Get("/competitions/comp/leaderboard?board=private");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body).size() == 1);
}

TEST_CASE("concurrent submissions serialize into a replayable log") {
  const long n = 30;
  const fs::path root = make_competition("hammer", n, "ladder-pf");
  TestServer ts(root);

  constexpr int kClients = 20, kEach = 5;
  std::atomic<int> failures{0};
  std::vector<std::thread> workers;
  for (int c = 0; c < kClients; ++c) {
    workers.emplace_back([&, c] {
      auto client = ts.client();
      Rng rng(static_cast<std::uint64_t>(1000 + c));
      for (int s = 0; s < kEach; ++s) {
        const json body{{"team", "team" + std::to_string(c)},
                        {"labels", random_submission(rng, n)}};
        httplib::Result res;
        for (int attempt = 0; attempt < 3; ++attempt) {
          res = client.Post("/competitions/comp/submissions", body.dump(),
                            "application/json");
          if (res) break;  // transport-level retry only; 4xx/5xx count
        }
        if (!res || res->status != 200) failures.fetch_add(1);
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(failures.load() == 0);

  // Quiesce, then check the log is gap-free and replays cleanly: open()
  // re-runs every event through the mechanism and verifies logged scores.
  const auto events = read_log(root / "comp" / "events.jsonl").events;
  CHECK(events.size() == kClients * kEach);
  Competition replayed = Competition::open(root / "comp");
  CHECK(replayed.last_seq() == kClients * kEach);
}

}  // TEST_SUITE
