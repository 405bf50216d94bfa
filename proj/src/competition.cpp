#include "ladder/competition.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace ladder {

nlohmann::json CompetitionSpec::to_json() const {
  return nlohmann::json{{"id", id},
                        {"alphabet", alphabet},
                        {"n_total", n_total},
                        {"public_idx", public_idx},
                        {"private_idx", private_idx},
                        {"loss", to_string(loss)},
                        {"mechanism", mechanism.to_json()},
                        {"raw_scale", raw_scale},
                        {"closed", closed}};
}

CompetitionSpec CompetitionSpec::from_json(const nlohmann::json& j) {
  CompetitionSpec s;
  s.id = j.at("id").get<std::string>();
  s.alphabet = j.at("alphabet").get<std::vector<double>>();
  s.n_total = j.at("n_total").get<long>();
  s.public_idx = j.at("public_idx").get<std::vector<int>>();
  s.private_idx = j.at("private_idx").get<std::vector<int>>();
  s.loss = loss_kind_from_string(j.at("loss").get<std::string>());
  s.mechanism = MechanismSpec::from_json(j.at("mechanism"));
  s.raw_scale = j.value("raw_scale", 1.0);
  s.closed = j.value("closed", false);
  s.validate();
  return s;
}

void CompetitionSpec::validate() const {
  if (n_total < 1) throw std::invalid_argument("n_total must be >= 1");
  if (static_cast<long>(public_idx.size() + private_idx.size()) != n_total)
    throw std::invalid_argument("split does not cover the test set");
  std::vector<char> seen(static_cast<std::size_t>(n_total), 0);
  for (const auto* set : {&public_idx, &private_idx})
    for (int i : *set) {
      if (i < 0 || i >= n_total || seen[static_cast<std::size_t>(i)])
        throw std::invalid_argument("split indices must partition [0,n)");
      seen[static_cast<std::size_t>(i)] = 1;
    }
}

Competition::Competition(fs::path dir, CompetitionSpec spec)
    : dir_(std::move(dir)), spec_(std::move(spec)) {}

Competition Competition::create(const fs::path& dir, CompetitionSpec spec,
                                const LabelVector& truth, bool force) {
  spec.validate();
  if (static_cast<long>(truth.size()) != spec.n_total)
    throw std::invalid_argument("truth length does not match n_total");
  if (fs::exists(dir / "spec.json") && !force)
    throw std::runtime_error("competition already exists at " + dir.string() +
                             " (use force to overwrite)");
  fs::create_directories(dir);
  if (force) {
    fs::remove(dir / "events.jsonl");
    fs::remove_all(dir / "blobs");
  }
  {
    std::ofstream out(dir / "spec.json");
    out << spec.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "truth.labels", std::ios::binary);
    const std::string bytes = canonical_bytes(truth);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  return open(dir);
}

Competition Competition::open(const fs::path& dir) {
  std::ifstream in(dir / "spec.json");
  if (!in) throw std::runtime_error("no competition at " + dir.string());
  nlohmann::json j;
  in >> j;
  Competition c(dir, CompetitionSpec::from_json(j));

  std::ifstream tin(dir / "truth.labels", std::ios::binary);
  std::ostringstream ss;
  ss << tin.rdbuf();
  c.truth_ = labels_from_canonical(ss.str());
  if (static_cast<long>(c.truth_.size()) != c.spec_.n_total)
    throw std::runtime_error("truth file length mismatch");

  c.board_ = std::make_unique<PerTeamBoard>(
      c.spec_.mechanism, static_cast<long>(c.spec_.public_idx.size()));
  c.blobs_ = std::make_unique<BlobStore>(dir / "blobs");
  c.log_ = std::make_unique<EventLog>(EventLog::open(dir / "events.jsonl"));
  c.replay_from_log();
  return c;
}

double Competition::step_team(const std::string& team,
                              const LabelVector& labels) {
  const LossVector lv =
      loss_vector(spec_.loss, labels, truth_, spec_.public_idx);
  return board_->submit(team, lv);
}

void Competition::replay_from_log() {
  const auto read = read_log(dir_ / "events.jsonl");
  for (const Event& e : read.events) {
    const LabelVector labels = labels_from_canonical(blobs_->get(e.digest));
    const double r = step_team(e.team, labels);
    if (e.score && *e.score != r)
      throw std::runtime_error("log replay mismatch at seq " +
                               std::to_string(e.seq));
    auto& best = best_submission_[e.team];
    if (best.second.empty() || r < best.first) best = {r, e.digest};
  }
}

Competition::SubmitResult Competition::submit(const std::string& team,
                                              const LabelVector& labels,
                                              long ts) {
  if (static_cast<long>(labels.size()) != spec_.n_total)
    throw std::invalid_argument("submission length does not match n_total");
  const std::string bytes = canonical_bytes(labels);
  const std::string digest = blobs_->put(bytes);
  const double score = step_team(team, labels);

  Event e;
  e.seq = log_->last_seq() + 1;
  e.ts = ts;
  e.team = team;
  e.digest = digest;
  e.score = score;
  log_->append(e);

  auto& best = best_submission_[team];
  if (best.second.empty() || score < best.first) best = {score, digest};
  return {e.seq, score, digest};
}

Competition::SubmitResult Competition::submit_file(const std::string& team,
                                                   std::string_view bytes,
                                                   long ts) {
  return submit(team, parse_submission_file(bytes, spec_.n_total, spec_.alphabet),
                ts);
}

std::vector<LeaderboardEntry> Competition::public_board() const {
  return board_->entries();
}

std::vector<LeaderboardEntry> Competition::private_board() const {
  const long n_priv = static_cast<long>(spec_.private_idx.size());
  struct Row {
    std::string team;
    double score;
    long submissions;
  };
  std::vector<Row> rows;
  for (const auto& e : board_->entries()) {
    const auto it = best_submission_.find(e.team);
    if (it == best_submission_.end()) continue;
    const LabelVector labels =
        labels_from_canonical(blobs_->get(it->second.second));
    const double emp =
        empirical_loss(spec_.loss, labels, truth_, spec_.private_idx);
    Mechanism grid_probe(spec_.mechanism, n_priv);
    rows.push_back({e.team, grid_round(emp, grid_probe.grid()), e.submissions});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.team < b.team;
  });
  std::vector<LeaderboardEntry> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back({static_cast<int>(i + 1), rows[i].team, rows[i].score,
                   rows[i].submissions});
  return out;
}

void Competition::close() {
  spec_.closed = true;
  std::ofstream out(dir_ / "spec.json");
  out << spec_.to_json().dump(2) << '\n';
}

}  // namespace ladder
