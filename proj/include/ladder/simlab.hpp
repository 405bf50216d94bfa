#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ladder/competition.hpp"
#include "ladder/losses.hpp"
#include "ladder/mechanisms.hpp"
#include "ladder/stats.hpp"

namespace ladder {

// ---- Boosting-attack comparison -----------------------------------------

struct BoostingConfig {
  long n_total = 12000;
  long n_public = 4000;
  long k = 400;
  int reps = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

// Per-step view of one attack run: the mechanism's reported best (counting
// a would-be submission of the current boosted vector), and the true public
// and heldout losses of that boosted vector.
struct AttackTrace {
  std::vector<double> reported_best;
  std::vector<double> public_true;
  std::vector<double> heldout_true;
};

struct BoostingSetting {
  std::string name;  // kaggle_fine, kaggle_coarse, ladder_pf
  MechanismSpec mechanism;
  std::vector<AttackTrace> reps;

  double mean_final_reported() const;
};

struct BoostingReport {
  BoostingConfig config;
  std::vector<BoostingSetting> settings;

  const BoostingSetting& setting(const std::string& name) const;
};

BoostingReport run_boosting_experiment(const BoostingConfig& config);

void write_boosting_csv(const BoostingReport& report, std::ostream& out);
nlohmann::json boosting_summary(const BoostingReport& report);

// ---- Split-stability study ----------------------------------------------

struct SplitStabilityRow {
  std::string id;
  double full_score = 0.0;  // mean loss on the whole private set
  double mean_half = 0.0;   // grand mean of half-scores across splits
  double std_half = 0.0;    // sample std of half-scores across splits
};

// Randomly halves the private set `reps` times and rescores every
// submission on each half. For odd sizes a seeded coin assigns the extra
// example.
std::vector<SplitStabilityRow> run_split_stability(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& private_losses,
    int reps, std::uint64_t seed);

// Hypergeometric (sampling without replacement) std of a half-mean; the
// oracle the empirical stds are compared against.
double half_score_std_oracle(const Eigen::Ref<const Eigen::VectorXd>& losses);

// ---- Top-m significance pipeline ----------------------------------------

struct SignificanceRow {
  int rank = 0;  // compared against rank 1
  double statistic = 0.0;
  double p_raw = 0.0;        // two-sided
  double p_corrected = 0.0;  // Bonferroni over non-degenerate comparisons
  bool degenerate = false;   // identical to rank 1; excluded from correction
  bool significant = false;
};

// Paired t-tests of rank 1 against rank r on private per-example losses,
// r = 2..m, Bonferroni-corrected, flagged at `level`.
std::vector<SignificanceRow> run_significance_analysis(
    const std::vector<Eigen::VectorXd>& private_losses, double level = 0.05);

// Same machinery applied to a single pair (correction factor 1).
bool pair_significantly_different(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v,
                                  double level = 0.05);

// ---- Synthetic fixtures ---------------------------------------------------

struct PlantedFixture {
  std::vector<Eigen::VectorXd> private_losses;  // index 0 = rank 1
  std::vector<int> planted_ranks;               // ranks carrying a real shift
};

// Top-m fixture: non-planted ranks are permutations of rank 1's losses
// (mean difference exactly zero), planted ranks carry a per-example shift
// plus noise so the paired test sees a genuine effect.
PlantedFixture make_planted_significance_fixture(long n, int m,
                                                 std::vector<int> planted_ranks,
                                                 double shift, double noise_std,
                                                 std::uint64_t seed);

struct FixtureEvent {
  long ts = 0;
  std::string team;
  LabelVector labels;
};

struct CompetitionFixture {
  LabelVector truth;
  std::vector<int> public_idx;
  std::vector<int> private_idx;
  LossKind loss = LossKind::ZeroOne;
  std::vector<FixtureEvent> events;
};

struct FixtureConfig {
  long n_total = 12000;
  double public_fraction = 0.3;
  int teams = 200;
  long submissions = 1785;
  // Shared-base mixing weight: fraction of each submission's error pattern
  // copied from a common base predictor, inducing the strong correlation
  // seen between leading submissions.
  double base_mix = 0.6;
  double base_error = 0.3;
  // Constant loss offset planted between public and private split scores.
  double underfit_offset = 0.0;
  LossKind loss = LossKind::ZeroOne;
  std::uint64_t seed = 1;
};

CompetitionFixture make_competition_fixture(const FixtureConfig& config);

void write_fixture_jsonl(const CompetitionFixture& fixture,
                         const std::filesystem::path& path);
CompetitionFixture read_fixture_jsonl(const std::filesystem::path& path);

// ---- Competition replay ---------------------------------------------------

struct ReplayResult {
  std::vector<LeaderboardEntry> public_board;
  std::vector<LeaderboardEntry> private_board;
  // Private per-example losses of each team's best public submission.
  std::vector<std::pair<std::string, Eigen::VectorXd>> private_losses;
};

ReplayResult replay_competition(const CompetitionFixture& fixture,
                                const MechanismSpec& mechanism);

struct RankPerturbation {
  std::string team;
  int rank_a = 0;
  int rank_b = 0;
};

// Teams whose rank differs between the two boards, restricted to the top
// `top_k` of either. diff(a,b) reverses under diff(b,a).
std::vector<RankPerturbation> perturbation_diff(
    const std::vector<LeaderboardEntry>& a,
    const std::vector<LeaderboardEntry>& b, int top_k);

}  // namespace ladder
