#include "ladder/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ladder/stats.hpp"

namespace ladder {

double ladder_step(LadderState& state, double empirical) {
  state.steps_seen += 1;
  if (!state.best_reported ||
      empirical < *state.best_reported - state.eta) {
    const double r = grid_round(empirical, state.eta);
    state.best_reported = r;
    state.updates_emitted += 1;
  }
  return *state.best_reported;
}

double ladder_pf_step(LadderPFState& state, const LossVector& losses) {
  const Eigen::Index n = state.best_loss_vector.size();
  if (losses.size() != n)
    throw std::invalid_argument("loss vector length mismatch");
  state.steps_seen += 1;
  const double s = sample_std(losses - state.best_loss_vector);
  const double mean = losses.mean();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  if (!state.best_reported ||
      mean < *state.best_reported - s / sqrt_n) {
    const double r = grid_round(mean, 1.0 / static_cast<double>(n));
    state.best_reported = r;
    state.best_loss_vector = losses;
    state.updates_emitted += 1;
  }
  return *state.best_reported;
}

double kaggle_step(double empirical, double alpha) {
  return grid_round(empirical, alpha);
}

double default_ladder_eta(long n, long k_hint) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double k = static_cast<double>(std::max<long>(k_hint > 0 ? k_hint : n, 2));
  return std::cbrt(std::log(k * static_cast<double>(n)) /
                   static_cast<double>(n));
}

std::string to_string(MechanismSpec::Kind k) {
  switch (k) {
    case MechanismSpec::Kind::Ladder: return "ladder";
    case MechanismSpec::Kind::LadderPF: return "ladder-pf";
    case MechanismSpec::Kind::Kaggle: return "kaggle";
  }
  throw std::logic_error("bad mechanism kind");
}

nlohmann::json MechanismSpec::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}};
  if (kind == Kind::Ladder) j["eta"] = eta;
  if (kind == Kind::Kaggle) j["alpha"] = alpha;
  return j;
}

MechanismSpec MechanismSpec::from_json(const nlohmann::json& j) {
  return parse(j.at("kind").get<std::string>(), j.value("eta", 0.0),
               j.value("alpha", 1e-5));
}

MechanismSpec MechanismSpec::parse(const std::string& kind, double eta,
                                   double alpha) {
  MechanismSpec s;
  if (kind == "ladder") {
    s.kind = Kind::Ladder;
    s.eta = eta;
  } else if (kind == "ladder-pf" || kind == "ladder_pf") {
    s.kind = Kind::LadderPF;
  } else if (kind == "kaggle") {
    s.kind = Kind::Kaggle;
    if (!(alpha > 0.0))
      throw std::invalid_argument("kaggle alpha must be positive");
    s.alpha = alpha;
  } else {
    throw std::invalid_argument("unknown mechanism kind: " + kind);
  }
  return s;
}

Mechanism::Mechanism(const MechanismSpec& spec, long n) : spec_(spec), n_(n) {
  if (n < 1) throw std::invalid_argument("scoring subset size must be >= 1");
  switch (spec.kind) {
    case MechanismSpec::Kind::Ladder: {
      LadderState st;
      st.eta = spec.eta > 0.0 ? spec.eta : default_ladder_eta(n);
      spec_.eta = st.eta;
      state_ = st;
      break;
    }
    case MechanismSpec::Kind::LadderPF: {
      if (n < 2)
        throw std::invalid_argument("parameter-free ladder needs n >= 2");
      LadderPFState st;
      st.best_loss_vector = LossVector::Zero(n);
      state_ = st;
      break;
    }
    case MechanismSpec::Kind::Kaggle:
      state_ = KaggleState{};
      break;
  }
}

double Mechanism::step(const LossVector& losses) {
  if (auto* pf = std::get_if<LadderPFState>(&state_))
    return ladder_pf_step(*pf, losses);
  return step_mean(losses.mean());
}

double Mechanism::step_mean(double empirical) {
  if (auto* l = std::get_if<LadderState>(&state_))
    return ladder_step(*l, empirical);
  if (auto* k = std::get_if<KaggleState>(&state_)) {
    k->steps_seen += 1;
    return kaggle_step(empirical, spec_.alpha);
  }
  throw std::logic_error("parameter-free ladder needs the full loss vector");
}

double Mechanism::peek(const LossVector& losses) const {
  Mechanism copy = *this;
  return copy.step(losses);
}

std::optional<double> Mechanism::best() const {
  if (const auto* l = std::get_if<LadderState>(&state_)) return l->best_reported;
  if (const auto* pf = std::get_if<LadderPFState>(&state_))
    return pf->best_reported;
  return std::nullopt;
}

long Mechanism::steps_seen() const {
  if (const auto* l = std::get_if<LadderState>(&state_)) return l->steps_seen;
  if (const auto* pf = std::get_if<LadderPFState>(&state_))
    return pf->steps_seen;
  return std::get<KaggleState>(state_).steps_seen;
}

long Mechanism::updates_emitted() const {
  if (const auto* l = std::get_if<LadderState>(&state_))
    return l->updates_emitted;
  if (const auto* pf = std::get_if<LadderPFState>(&state_))
    return pf->updates_emitted;
  return std::get<KaggleState>(state_).steps_seen;
}

double Mechanism::grid() const {
  switch (spec_.kind) {
    case MechanismSpec::Kind::Ladder: return spec_.eta;
    case MechanismSpec::Kind::LadderPF: return 1.0 / static_cast<double>(n_);
    case MechanismSpec::Kind::Kaggle: return spec_.alpha;
  }
  throw std::logic_error("bad mechanism kind");
}

nlohmann::json Mechanism::snapshot() const {
  nlohmann::json j = spec_.to_json();
  j["n"] = n_;
  if (const auto* l = std::get_if<LadderState>(&state_)) {
    j["best"] = l->best_reported ? nlohmann::json(*l->best_reported)
                                 : nlohmann::json();
    j["steps_seen"] = l->steps_seen;
    j["updates_emitted"] = l->updates_emitted;
  } else if (const auto* pf = std::get_if<LadderPFState>(&state_)) {
    j["best"] = pf->best_reported ? nlohmann::json(*pf->best_reported)
                                  : nlohmann::json();
    j["steps_seen"] = pf->steps_seen;
    j["updates_emitted"] = pf->updates_emitted;
    j["best_loss_vector"] = std::vector<double>(
        pf->best_loss_vector.data(),
        pf->best_loss_vector.data() + pf->best_loss_vector.size());
  } else {
    j["steps_seen"] = std::get<KaggleState>(state_).steps_seen;
  }
  return j;
}

Mechanism Mechanism::from_snapshot(const nlohmann::json& j) {
  Mechanism m(MechanismSpec::from_json(j), j.at("n").get<long>());
  if (auto* l = std::get_if<LadderState>(&m.state_)) {
    if (!j.at("best").is_null()) l->best_reported = j.at("best").get<double>();
    l->steps_seen = j.at("steps_seen").get<long>();
    l->updates_emitted = j.at("updates_emitted").get<long>();
  } else if (auto* pf = std::get_if<LadderPFState>(&m.state_)) {
    if (!j.at("best").is_null()) pf->best_reported = j.at("best").get<double>();
    pf->steps_seen = j.at("steps_seen").get<long>();
    pf->updates_emitted = j.at("updates_emitted").get<long>();
    const auto v = j.at("best_loss_vector").get<std::vector<double>>();
    pf->best_loss_vector =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    std::get<KaggleState>(m.state_).steps_seen = j.at("steps_seen").get<long>();
  }
  return m;
}

PerTeamBoard::PerTeamBoard(const MechanismSpec& spec, long n)
    : spec_(spec), n_(n) {}

double PerTeamBoard::submit(const std::string& team, const LossVector& losses) {
  clock_ += 1;
  auto it = slots_.find(team);
  if (it == slots_.end())
    it = slots_.emplace(team, Slot{Mechanism(spec_, n_), 0, std::nullopt, 0})
             .first;
  Slot& slot = it->second;
  const double r = slot.mech.step(losses);
  slot.submissions += 1;
  if (!slot.best_score || r < *slot.best_score) {
    slot.best_score = r;
    slot.best_achieved_at = clock_;
  }
  return r;
}

std::vector<LeaderboardEntry> PerTeamBoard::entries() const {
  struct Row {
    const std::string* team;
    double score;
    long achieved;
    long submissions;
  };
  std::vector<Row> rows;
  rows.reserve(slots_.size());
  for (const auto& [team, slot] : slots_) {
    if (!slot.best_score) continue;
    rows.push_back(
        {&team, *slot.best_score, slot.best_achieved_at, slot.submissions});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.achieved < b.achieved;
  });
  std::vector<LeaderboardEntry> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back({static_cast<int>(i + 1), *rows[i].team, rows[i].score,
                   rows[i].submissions});
  return out;
}

const Mechanism* PerTeamBoard::team_mechanism(const std::string& team) const {
  auto it = slots_.find(team);
  return it == slots_.end() ? nullptr : &it->second.mech;
}

PerRankBoard::PerRankBoard(const MechanismSpec& spec, long n,
                           std::size_t max_size)
    : spec_(spec), n_(n), max_size_(max_size) {
  if (spec.kind == MechanismSpec::Kind::Kaggle)
    throw std::invalid_argument(
        "per-rank composition requires a stateful mechanism");
}

std::optional<std::size_t> PerRankBoard::submit(const LossVector& losses) {
  const bool can_grow = max_size_ == 0 || ranks_.size() < max_size_;
  std::optional<std::size_t> placement;  // 0-based insert position
  if (can_grow) placement = ranks_.size();  // fresh instance always accepts
  // Walk from the worst rank towards rank 1; acceptance thresholds tighten
  // monotonically, so stop at the first rejecting instance.
  for (std::size_t i = ranks_.size(); i-- > 0;) {
    Mechanism probe = ranks_[i];
    const long before = probe.updates_emitted();
    probe.step(losses);
    if (probe.updates_emitted() == before) break;
    placement = i;
  }
  if (!placement) return std::nullopt;
  const std::size_t p = *placement;
  Mechanism inserted = p < ranks_.size() ? ranks_[p] : Mechanism(spec_, n_);
  inserted.step(losses);
  ranks_.insert(ranks_.begin() + static_cast<std::ptrdiff_t>(p),
                std::move(inserted));
  if (max_size_ != 0 && ranks_.size() > max_size_) ranks_.pop_back();
  return p + 1;
}

std::vector<double> PerRankBoard::scores() const {
  std::vector<double> out;
  out.reserve(ranks_.size());
  for (const auto& m : ranks_) out.push_back(m.best().value());
  return out;
}

}  // namespace ladder
