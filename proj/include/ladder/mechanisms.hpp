#pragma once

#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ladder/losses.hpp"

namespace ladder {

// The initial "infinity" estimate is a distinguished absent state, not a
// float infinity, so serialized snapshots stay format-portable.
// Fig-of-merit sequences are losses: smaller is better throughout.

struct LadderState {
  std::optional<double> best_reported;  // absent = sentinel infinity
  double eta = 0.0;
  long steps_seen = 0;
  long updates_emitted = 0;
};

struct LadderPFState {
  std::optional<double> best_reported;
  LossVector best_loss_vector;  // starts all zeros, length n
  long steps_seen = 0;
  long updates_emitted = 0;
};

// One Ladder round: release a new grid-rounded estimate only when the
// empirical loss beats the incumbent by more than eta, else repeat it.
double ladder_step(LadderState& state, double empirical);

// Parameter-free round: the margin is std(l_t - l_{t-1})/sqrt(n) and
// releases are rounded to the 1/n grid.
double ladder_pf_step(LadderPFState& state, const LossVector& losses);

// The Kaggle reference mechanism is stateless; only the step counter is
// kept so replays can reconstruct t.
struct KaggleState {
  long steps_seen = 0;
};

// Stateless reference mechanism: every empirical loss, grid-rounded.
double kaggle_step(double empirical, double alpha);

// eta = (ln(max(k_hint,2)*n)/n)^(1/3), constant 1; k_hint defaults to n.
double default_ladder_eta(long n, long k_hint = -1);

struct MechanismSpec {
  enum class Kind { Ladder, LadderPF, Kaggle };
  Kind kind = Kind::LadderPF;
  double eta = 0.0;     // Ladder; 0 = use default_ladder_eta(n)
  double alpha = 1e-5;  // Kaggle

  nlohmann::json to_json() const;
  static MechanismSpec from_json(const nlohmann::json& j);
  static MechanismSpec parse(const std::string& kind, double eta, double alpha);
};

std::string to_string(MechanismSpec::Kind k);

// A single sequential scoring instance behind a uniform step interface.
// Every mechanism consumes the per-example loss vector of a submission on
// the scoring subset; Ladder and Kaggle use only its mean.
class Mechanism {
 public:
  Mechanism(const MechanismSpec& spec, long n);

  double step(const LossVector& losses);
  double step_mean(double empirical);  // Ladder/Kaggle only

  // Report this mechanism would give without advancing state.
  double peek(const LossVector& losses) const;

  std::optional<double> best() const;
  long steps_seen() const;
  long updates_emitted() const;
  double grid() const;  // eta, 1/n or alpha
  const MechanismSpec& spec() const { return spec_; }

  nlohmann::json snapshot() const;
  static Mechanism from_snapshot(const nlohmann::json& j);

 private:
  Mechanism() = default;

  MechanismSpec spec_;
  long n_ = 0;
  std::variant<LadderState, LadderPFState, KaggleState> state_;
};

struct LeaderboardEntry {
  int rank = 0;
  std::string team;
  double score = 0.0;
  long submissions = 0;
};

// Full leaderboard, composition 1: one mechanism instance per team.
// Entries sort by reported loss ascending, ties broken by the earlier
// achievement of the current best.
class PerTeamBoard {
 public:
  PerTeamBoard(const MechanismSpec& spec, long n);

  double submit(const std::string& team, const LossVector& losses);
  std::vector<LeaderboardEntry> entries() const;
  const Mechanism* team_mechanism(const std::string& team) const;

 private:
  struct Slot {
    Mechanism mech;
    long submissions = 0;
    std::optional<double> best_score;  // min reported so far (Kaggle included)
    long best_achieved_at = 0;  // global submission index of current best
  };

  MechanismSpec spec_;
  long n_ = 0;
  long clock_ = 0;
  std::map<std::string, Slot> slots_;
};

// Full leaderboard, composition 2: one mechanism instance per rank,
// evaluated from the worst rank to the best. An accepted submission is
// inserted at the best rank that accepted it; displaced ranks shift down
// and keep their values. max_size 0 means the board grows without bound.
class PerRankBoard {
 public:
  PerRankBoard(const MechanismSpec& spec, long n, std::size_t max_size = 0);

  // 1-based placement, or nullopt if every rank rejected and the board
  // cannot grow. Rejected submissions leave the board untouched.
  std::optional<std::size_t> submit(const LossVector& losses);

  std::vector<double> scores() const;
  std::size_t size() const { return ranks_.size(); }

 private:
  MechanismSpec spec_;
  long n_ = 0;
  std::size_t max_size_ = 0;
  std::vector<Mechanism> ranks_;  // index 0 = rank 1 (best)
};

}  // namespace ladder
