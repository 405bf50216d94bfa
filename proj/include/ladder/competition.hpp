#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladder/losses.hpp"
#include "ladder/mechanisms.hpp"
#include "ladder/store.hpp"

namespace ladder {

struct CompetitionSpec {
  std::string id;
  std::vector<double> alphabet;  // empty: continuous predictions in [0,1]
  long n_total = 0;
  std::vector<int> public_idx;
  std::vector<int> private_idx;
  LossKind loss = LossKind::ZeroOne;
  MechanismSpec mechanism;
  double raw_scale = 1.0;  // display factor; losses are stored in [0,1]
  bool closed = false;

  nlohmann::json to_json() const;
  static CompetitionSpec from_json(const nlohmann::json& j);
  void validate() const;
};

// On-disk competition: spec.json, truth.labels, events.jsonl, blobs/.
// Replays the log on open so reported scores always continue the recorded
// sequence. Single writer per directory.
class Competition {
 public:
  struct SubmitResult {
    long seq = 0;
    double score = 0.0;
    std::string digest;
  };

  static Competition create(const std::filesystem::path& dir,
                            CompetitionSpec spec, const LabelVector& truth,
                            bool force = false);
  static Competition open(const std::filesystem::path& dir);

  SubmitResult submit(const std::string& team, const LabelVector& labels,
                      long ts);
  SubmitResult submit_file(const std::string& team, std::string_view bytes,
                           long ts);

  std::vector<LeaderboardEntry> public_board() const;
  // Scores each team's best public submission on the private split,
  // rounded to the mechanism grid of the private subset.
  std::vector<LeaderboardEntry> private_board() const;

  void close();

  const CompetitionSpec& spec() const { return spec_; }
  const LabelVector& truth() const { return truth_; }
  const std::filesystem::path& dir() const { return dir_; }
  long last_seq() const { return log_->last_seq(); }

 private:
  Competition(std::filesystem::path dir, CompetitionSpec spec);

  void replay_from_log();
  double step_team(const std::string& team, const LabelVector& labels);

  std::filesystem::path dir_;
  CompetitionSpec spec_;
  LabelVector truth_;
  std::unique_ptr<PerTeamBoard> board_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<BlobStore> blobs_;
  // digest of each team's submission that achieved its current best score
  std::map<std::string, std::pair<double, std::string>> best_submission_;
};

}  // namespace ladder
