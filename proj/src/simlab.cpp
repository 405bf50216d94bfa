#include "ladder/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ladder/attack.hpp"
#include "ladder/rng.hpp"
#include "ladder/store.hpp"

namespace ladder {

// ---- Boosting-attack comparison -----------------------------------------

void BoostingConfig::validate() const {
  if (n_total < 2 || n_public < 2 || n_public >= n_total)
    throw std::invalid_argument("need 2 <= n_public < n_total");
  if (k < 1 || reps < 1) throw std::invalid_argument("k and reps must be >= 1");
}

double BoostingSetting::mean_final_reported() const {
  double sum = 0.0;
  for (const auto& tr : reps) sum += tr.reported_best.back();
  return sum / static_cast<double>(reps.size());
}

const BoostingSetting& BoostingReport::setting(const std::string& name) const {
  for (const auto& s : settings)
    if (s.name == name) return s;
  throw std::out_of_range("no setting named " + name);
}

namespace {

double mean_zero_one(const LabelVector& u, const LabelVector& truth,
                     const std::vector<int>& subset) {
  long disagree = 0;
  for (int i : subset) disagree += u[static_cast<std::size_t>(i)] !=
                                   truth[static_cast<std::size_t>(i)];
  return static_cast<double>(disagree) / static_cast<double>(subset.size());
}

LossVector zero_one_vector(const LabelVector& u, const LabelVector& truth,
                           const std::vector<int>& subset) {
  LossVector lv(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t j = 0; j < subset.size(); ++j) {
    const int i = subset[j];
    lv[static_cast<Eigen::Index>(j)] =
        u[static_cast<std::size_t>(i)] != truth[static_cast<std::size_t>(i)]
            ? 1.0
            : 0.0;
  }
  return lv;
}

AttackTrace run_attack_trace(const MechanismSpec& spec,
                             AttackConfig::Variant variant,
                             const LabelVector& truth,
                             const std::vector<int>& public_idx,
                             const std::vector<int>& private_idx, long k,
                             std::uint64_t attack_seed) {
  const long n_total = static_cast<long>(truth.size());
  Mechanism mech(spec, static_cast<long>(public_idx.size()));
  // The attacker only sees grid values, so "at or below chance" means at or
  // below 1/2 as expressible on the mechanism's reporting grid.
  const double chance = grid_round(0.5, mech.grid());

  AttackTrace trace;
  trace.reported_best.reserve(static_cast<std::size_t>(k));
  trace.public_true.reserve(static_cast<std::size_t>(k));
  trace.heldout_true.reserve(static_cast<std::size_t>(k));

  std::vector<long> ones(static_cast<std::size_t>(n_total), 0);
  long selected = 0;
  LabelVector first;
  double incumbent = std::numeric_limits<double>::infinity();
  double best_report = std::numeric_limits<double>::infinity();

  for (long t = 1; t <= k; ++t) {
    const LabelVector u = attack_vector(attack_seed, t, n_total);
    if (t == 1) first = u;
    const double report = mech.step(zero_one_vector(u, truth, public_idx));
    best_report = std::min(best_report, report);

    const bool take = variant == AttackConfig::Variant::ThresholdHalf
                          ? report <= chance
                          : report < incumbent;
    if (variant == AttackConfig::Variant::ImprovementSelected && take)
      incumbent = report;
    if (take) {
      selected += 1;
      for (long i = 0; i < n_total; ++i)
        ones[static_cast<std::size_t>(i)] +=
            u[static_cast<std::size_t>(i)] == 1.0;
    }

    // Current boosted vector: majority of the selected set, u_1 fallback.
    LabelVector star(static_cast<std::size_t>(n_total));
    if (selected == 0) {
      star = first;
    } else {
      Rng tie(derive_seed(attack_seed, 0x3A11ED00ull + static_cast<std::uint64_t>(t)));
      for (long i = 0; i < n_total; ++i) {
        const long c = ones[static_cast<std::size_t>(i)];
        if (2 * c > selected)
          star[static_cast<std::size_t>(i)] = 1.0;
        else if (2 * c < selected)
          star[static_cast<std::size_t>(i)] = 0.0;
        else
          star[static_cast<std::size_t>(i)] = static_cast<double>(tie.bit());
      }
    }

    const double star_report = mech.peek(zero_one_vector(star, truth, public_idx));
    trace.reported_best.push_back(std::min(best_report, star_report));
    trace.public_true.push_back(mean_zero_one(star, truth, public_idx));
    trace.heldout_true.push_back(mean_zero_one(star, truth, private_idx));
  }
  return trace;
}

}  // namespace

BoostingReport run_boosting_experiment(const BoostingConfig& config) {
  config.validate();
  const double alpha_coarse =
      1.0 / std::sqrt(static_cast<double>(config.n_public));

  BoostingReport report;
  report.config = config;
  report.settings = {
      {"kaggle_fine", MechanismSpec::parse("kaggle", 0.0, 1e-5), {}},
      {"kaggle_coarse", MechanismSpec::parse("kaggle", 0.0, alpha_coarse), {}},
      {"ladder_pf", MechanismSpec::parse("ladder-pf", 0.0, 0.0), {}},
  };

  for (int rep = 0; rep < config.reps; ++rep) {
    const std::uint64_t rep_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    Rng truth_rng(derive_seed(rep_seed, 1));
    LabelVector truth(static_cast<std::size_t>(config.n_total));
    for (auto& y : truth) y = static_cast<double>(truth_rng.bit());
    const auto [public_idx, private_idx] = split_assign(
        config.n_total,
        static_cast<double>(config.n_public) / static_cast<double>(config.n_total),
        derive_seed(rep_seed, 2));
    const std::uint64_t attack_seed = derive_seed(rep_seed, 3);

    for (auto& setting : report.settings) {
      const auto variant = setting.name == "ladder_pf"
                               ? AttackConfig::Variant::ImprovementSelected
                               : AttackConfig::Variant::ThresholdHalf;
      setting.reps.push_back(run_attack_trace(setting.mechanism, variant, truth,
                                              public_idx, private_idx, config.k,
                                              attack_seed));
    }
  }
  return report;
}

void write_boosting_csv(const BoostingReport& report, std::ostream& out) {
  out << "setting,rep,step,reported_best,public_true,heldout_true\n";
  nlohmann::json num;  // reuse JSON double formatting: shortest round-trip
  const auto fmt = [&num](double x) {
    num = x;
    return num.dump();
  };
  for (const auto& setting : report.settings)
    for (std::size_t rep = 0; rep < setting.reps.size(); ++rep) {
      const auto& tr = setting.reps[rep];
      for (std::size_t t = 0; t < tr.reported_best.size(); ++t)
        out << setting.name << ',' << rep << ',' << t + 1 << ','
            << fmt(tr.reported_best[t]) << ',' << fmt(tr.public_true[t]) << ','
            << fmt(tr.heldout_true[t]) << '\n';
    }
}

nlohmann::json boosting_summary(const BoostingReport& report) {
  nlohmann::json settings = nlohmann::json::array();
  for (const auto& s : report.settings) {
    std::vector<double> finals, heldout;
    for (const auto& tr : s.reps) {
      finals.push_back(tr.reported_best.back());
      heldout.push_back(tr.heldout_true.back());
    }
    settings.push_back({{"name", s.name},
                        {"mechanism", s.mechanism.to_json()},
                        {"final_reported_best", finals},
                        {"final_heldout_true", heldout},
                        {"mean_final_reported", s.mean_final_reported()}});
  }
  return nlohmann::json{{"experiment", "boosting"},
                        {"n_total", report.config.n_total},
                        {"n_public", report.config.n_public},
                        {"k", report.config.k},
                        {"reps", report.config.reps},
                        {"seed", report.config.seed},
                        {"settings", settings}};
}

// ---- Split-stability study ----------------------------------------------

std::vector<SplitStabilityRow> run_split_stability(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& private_losses,
    int reps, std::uint64_t seed) {
  if (private_losses.empty())
    throw std::invalid_argument("no submissions to rescore");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  const Eigen::Index n = private_losses.front().second.size();
  for (const auto& [id, v] : private_losses)
    if (v.size() != n)
      throw std::invalid_argument("loss vectors must share one length");

  std::vector<std::vector<double>> half_scores(private_losses.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    rng.shuffle(order);
    std::size_t h1 = static_cast<std::size_t>(n) / 2;
    if (n % 2 != 0 && rng.bit()) h1 += 1;  // seeded coin for the odd example
    for (std::size_t s = 0; s < private_losses.size(); ++s) {
      const auto& v = private_losses[s].second;
      double sum1 = 0.0, sum2 = 0.0;
      for (std::size_t j = 0; j < order.size(); ++j)
        (j < h1 ? sum1 : sum2) += v[order[j]];
      half_scores[s].push_back(sum1 / static_cast<double>(h1));
      half_scores[s].push_back(sum2 / static_cast<double>(order.size() - h1));
    }
  }

  std::vector<SplitStabilityRow> rows;
  rows.reserve(private_losses.size());
  for (std::size_t s = 0; s < private_losses.size(); ++s) {
    const auto& scores = half_scores[s];
    const Eigen::Map<const Eigen::VectorXd> v(scores.data(),
                                              static_cast<Eigen::Index>(scores.size()));
    rows.push_back({private_losses[s].first, private_losses[s].second.mean(),
                    v.mean(), scores.size() > 1 ? sample_std(v) : 0.0});
  }
  return rows;
}

double half_score_std_oracle(const Eigen::Ref<const Eigen::VectorXd>& losses) {
  const double n = static_cast<double>(losses.size());
  const double h = std::floor(n / 2.0);
  const double mean = losses.mean();
  const double pop_var = (losses.array() - mean).square().sum() / n;
  // Mean of h draws without replacement from the n per-example losses.
  return std::sqrt(pop_var / h * (n - h) / (n - 1.0));
}

// ---- Top-m significance pipeline ----------------------------------------

std::vector<SignificanceRow> run_significance_analysis(
    const std::vector<Eigen::VectorXd>& private_losses, double level) {
  if (private_losses.size() < 2)
    throw std::invalid_argument("need at least two submissions");
  std::vector<SignificanceRow> rows;
  long comparisons = 0;
  for (std::size_t r = 1; r < private_losses.size(); ++r) {
    SignificanceRow row;
    row.rank = static_cast<int>(r + 1);
    try {
      const TTestResult t = paired_t(private_losses[0], private_losses[r]);
      row.statistic = t.statistic;
      row.p_raw = std::min(1.0, 2.0 * std::min(t.p_one_sided, 1.0 - t.p_one_sided));
      comparisons += 1;
    } catch (const DegenerateDifferenceError&) {
      row.degenerate = true;
      row.p_raw = 1.0;
    }
    rows.push_back(row);
  }
  for (auto& row : rows) {
    if (row.degenerate) {
      row.p_corrected = 1.0;
      continue;
    }
    row.p_corrected = std::min(1.0, row.p_raw * static_cast<double>(comparisons));
    row.significant = row.p_corrected < level;
  }
  return rows;
}

bool pair_significantly_different(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v,
                                  double level) {
  const auto rows = run_significance_analysis({u, v}, level);
  return rows.front().significant;
}

// ---- Synthetic fixtures ---------------------------------------------------

PlantedFixture make_planted_significance_fixture(long n, int m,
                                                 std::vector<int> planted_ranks,
                                                 double shift, double noise_std,
                                                 std::uint64_t seed) {
  if (n < 2 || m < 2) throw std::invalid_argument("need n >= 2 and m >= 2");
  for (int r : planted_ranks)
    if (r < 2 || r > m)
      throw std::invalid_argument("planted ranks must lie in [2,m]");

  PlantedFixture fx;
  fx.planted_ranks = std::move(planted_ranks);
  Rng rng(derive_seed(seed, 17));

  Eigen::VectorXd base(n);
  for (Eigen::Index i = 0; i < n; ++i) base[i] = 0.2 + 0.6 * rng.real();
  fx.private_losses.push_back(base);

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int r = 2; r <= m; ++r) {
    const bool planted = std::find(fx.planted_ranks.begin(),
                                   fx.planted_ranks.end(), r) !=
                         fx.planted_ranks.end();
    Eigen::VectorXd v(n);
    if (planted) {
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = std::clamp(base[i] + shift + noise_std * rng.normal(), 0.0, 1.0);
    } else {
      rng.shuffle(perm);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = base[perm[static_cast<std::size_t>(i)]];
    }
    fx.private_losses.push_back(std::move(v));
  }
  return fx;
}

CompetitionFixture make_competition_fixture(const FixtureConfig& config) {
  if (config.teams < 1 || config.submissions < config.teams)
    throw std::invalid_argument("need submissions >= teams >= 1");

  CompetitionFixture fx;
  fx.loss = config.loss;
  Rng rng(derive_seed(config.seed, 0xF1C));

  fx.truth.resize(static_cast<std::size_t>(config.n_total));
  for (auto& y : fx.truth) y = static_cast<double>(rng.bit());
  std::tie(fx.public_idx, fx.private_idx) = split_assign(
      config.n_total, config.public_fraction, derive_seed(config.seed, 0x5B));

  std::vector<char> is_public(static_cast<std::size_t>(config.n_total), 0);
  for (int i : fx.public_idx) is_public[static_cast<std::size_t>(i)] = 1;

  // Shared base error pattern; teams inherit it with weight base_mix, which
  // makes the leading submissions strongly correlated.
  std::vector<char> base_flip(static_cast<std::size_t>(config.n_total));
  for (auto& f : base_flip) f = rng.real() < config.base_error ? 1 : 0;

  // Final qualities spread evenly with a small jitter; adjacent teams are
  // near-ties, distant teams are clearly separated.
  const int teams = config.teams;
  std::vector<double> final_error(static_cast<std::size_t>(teams));
  for (int j = 0; j < teams; ++j)
    final_error[static_cast<std::size_t>(j)] =
        0.31 + 0.12 * (teams > 1 ? static_cast<double>(j) / (teams - 1) : 0.0) +
        0.001 * rng.real();

  std::vector<long> count(static_cast<std::size_t>(teams),
                          config.submissions / teams);
  for (long r = 0; r < config.submissions % teams; ++r)
    count[static_cast<std::size_t>(r)] += 1;

  // Global submission order: a shuffled multiset of team ids, each team's
  // own submissions improving in its private order.
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(config.submissions));
  for (int j = 0; j < teams; ++j)
    order.insert(order.end(), static_cast<std::size_t>(count[static_cast<std::size_t>(j)]), j);
  rng.shuffle(order);

  std::vector<long> made(static_cast<std::size_t>(teams), 0);
  long ts = 0;
  for (int j : order) {
    const std::size_t ju = static_cast<std::size_t>(j);
    const long s = made[ju]++;
    const long c = count[ju];
    const double e_final = final_error[ju];
    const double e_start = std::min(0.48, e_final + 0.08);
    const double frac = c > 1 ? static_cast<double>(s) / static_cast<double>(c - 1) : 1.0;
    const double target = e_start + (e_final - e_start) * frac;
    // Own flip rate so that base_mix*base_error + (1-mix)*own = target.
    const double own = std::max(
        0.0, (target - config.base_mix * config.base_error) / (1.0 - config.base_mix));

    FixtureEvent ev;
    ev.ts = ++ts;
    ev.team = "team" + std::string(j < 10 ? "00" : j < 100 ? "0" : "") +
              std::to_string(j);
    ev.labels.resize(static_cast<std::size_t>(config.n_total));
    for (long i = 0; i < config.n_total; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      bool flip = rng.real() < config.base_mix
                      ? base_flip[iu] != 0
                      : rng.real() < own;
      if (config.underfit_offset != 0.0 && is_public[iu] && !flip)
        flip = rng.real() < config.underfit_offset;
      ev.labels[iu] = flip ? 1.0 - fx.truth[iu] : fx.truth[iu];
    }
    fx.events.push_back(std::move(ev));
  }
  return fx;
}

void write_fixture_jsonl(const CompetitionFixture& fixture,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture: " + path.string());
  nlohmann::json header{{"type", "header"},
                        {"v", 1},
                        {"n_total", fixture.truth.size()},
                        {"loss", to_string(fixture.loss)},
                        {"public_idx", fixture.public_idx},
                        {"private_idx", fixture.private_idx},
                        {"truth", fixture.truth}};
  out << header.dump() << '\n';
  long seq = 0;
  for (const auto& ev : fixture.events) {
    nlohmann::json j{{"type", "event"}, {"v", 1},          {"seq", ++seq},
                     {"ts", ev.ts},     {"team", ev.team}, {"labels", ev.labels}};
    out << j.dump() << '\n';
  }
}

CompetitionFixture read_fixture_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fixture: " + path.string());
  CompetitionFixture fx;
  std::string line;
  long record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++record;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.value("v", 0) != 1)
      throw std::runtime_error("unknown fixture schema version at record " +
                               std::to_string(record));
    if (record == 1) {
      if (j.at("type") != "header")
        throw std::runtime_error("fixture must start with a header record");
      fx.truth = j.at("truth").get<LabelVector>();
      fx.loss = loss_kind_from_string(j.at("loss").get<std::string>());
      fx.public_idx = j.at("public_idx").get<std::vector<int>>();
      fx.private_idx = j.at("private_idx").get<std::vector<int>>();
    } else {
      FixtureEvent ev;
      ev.ts = j.at("ts").get<long>();
      ev.team = j.at("team").get<std::string>();
      ev.labels = j.at("labels").get<LabelVector>();
      fx.events.push_back(std::move(ev));
    }
  }
  if (record == 0) throw std::runtime_error("empty fixture file");
  return fx;
}

// ---- Competition replay ---------------------------------------------------

ReplayResult replay_competition(const CompetitionFixture& fixture,
                                const MechanismSpec& mechanism) {
  const long n_pub = static_cast<long>(fixture.public_idx.size());
  const long n_priv = static_cast<long>(fixture.private_idx.size());
  PerTeamBoard board(mechanism, n_pub);

  struct Best {
    double score = std::numeric_limits<double>::infinity();
    const LabelVector* labels = nullptr;
  };
  std::map<std::string, Best> best;

  for (const auto& ev : fixture.events) {
    const LossVector lv =
        loss_vector(fixture.loss, ev.labels, fixture.truth, fixture.public_idx);
    const double r = board.submit(ev.team, lv);
    auto& b = best[ev.team];
    if (!b.labels || r < b.score) b = {r, &ev.labels};
  }

  ReplayResult result;
  result.public_board = board.entries();

  const double priv_grid = Mechanism(mechanism, n_priv).grid();
  struct Row {
    std::string team;
    double score;
    long submissions;
  };
  std::vector<Row> rows;
  for (const auto& e : result.public_board) {
    const auto& b = best.at(e.team);
    Eigen::VectorXd lv =
        loss_vector(fixture.loss, *b.labels, fixture.truth, fixture.private_idx);
    rows.push_back({e.team, grid_round(lv.mean(), priv_grid), e.submissions});
    result.private_losses.emplace_back(e.team, std::move(lv));
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.team < b.team;
  });
  for (std::size_t i = 0; i < rows.size(); ++i)
    result.private_board.push_back({static_cast<int>(i + 1), rows[i].team,
                                    rows[i].score, rows[i].submissions});
  return result;
}

std::vector<RankPerturbation> perturbation_diff(
    const std::vector<LeaderboardEntry>& a,
    const std::vector<LeaderboardEntry>& b, int top_k) {
  std::map<std::string, int> rank_a, rank_b;
  for (const auto& e : a) rank_a[e.team] = e.rank;
  for (const auto& e : b) rank_b[e.team] = e.rank;

  std::vector<RankPerturbation> diff;
  for (const auto& [team, ra] : rank_a) {
    const auto it = rank_b.find(team);
    if (it == rank_b.end()) continue;
    const int rb = it->second;
    if (ra == rb) continue;
    if (ra > top_k && rb > top_k) continue;
    diff.push_back({team, ra, rb});
  }
  std::sort(diff.begin(), diff.end(),
            [](const RankPerturbation& x, const RankPerturbation& y) {
              const int mx = std::min(x.rank_a, x.rank_b);
              const int my = std::min(y.rank_a, y.rank_b);
              return mx != my ? mx < my : x.team < y.team;
            });
  return diff;
}

}  // namespace ladder
