// Command-line front end: create competitions, score submissions, run the
// attack and experiment harnesses, and emit plot-ready reports.
//
// Human-readable chatter goes to stderr; machine-readable results go to
// stdout or to files. Exit codes: 0 success, 1 runtime failure, 2 invalid
// input.

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ladder/attack.hpp"
#include "ladder/competition.hpp"
#include "ladder/simlab.hpp"
#include "ladder/stats.hpp"

using namespace ladder;
using nlohmann::json;

namespace {

bool g_quiet = false;

void note(const std::string& msg) {
  if (!g_quiet) std::cerr << msg << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Randomized subcommands either take --seed or get one recorded in output.
std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t seed) {
  if (opt->count() > 0) return seed;
  std::random_device rd;
  const std::uint64_t generated =
      (static_cast<std::uint64_t>(rd()) << 32) | rd();
  note("no --seed given; generated seed " + std::to_string(generated));
  return generated;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json volatile_sidecar_fields() {
  return json{{"generated_at_ms",
               std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count()}};
}

void write_report(const std::string& out_prefix, const std::string& csv,
                  json summary, std::uint64_t seed) {
  summary["seed"] = seed;
  summary["volatile"] = volatile_sidecar_fields();
  write_text(out_prefix + ".csv", csv);
  write_text(out_prefix + ".json", summary.dump(2) + "\n");
  note("wrote " + out_prefix + ".csv and " + out_prefix + ".json");
}

std::string board_csv(const std::vector<LeaderboardEntry>& board) {
  std::ostringstream out;
  json num;
  out << "rank,team,score,submissions\n";
  for (const auto& e : board) {
    num = e.score;
    out << e.rank << ',' << e.team << ',' << num.dump() << ','
        << e.submissions << '\n';
  }
  return out.str();
}

json board_to_json(const std::vector<LeaderboardEntry>& board) {
  json out = json::array();
  for (const auto& e : board)
    out.push_back({{"rank", e.rank},
                   {"team", e.team},
                   {"score", e.score},
                   {"submissions", e.submissions}});
  return out;
}

// Mechanism oracle over a synthetic competition, for the attack subcommand.
class MechanismOracle final : public LossOracle {
 public:
  MechanismOracle(Mechanism mech, const LabelVector& truth,
                  std::vector<int> public_idx)
      : mech_(std::move(mech)), truth_(truth), public_idx_(std::move(public_idx)) {}

  double score(const LabelVector& labels) override {
    LossVector lv(static_cast<Eigen::Index>(public_idx_.size()));
    for (std::size_t j = 0; j < public_idx_.size(); ++j) {
      const auto i = static_cast<std::size_t>(public_idx_[j]);
      lv[static_cast<Eigen::Index>(j)] = labels[i] != truth_[i] ? 1.0 : 0.0;
    }
    return mech_.step(lv);
  }

 private:
  Mechanism mech_;
  const LabelVector& truth_;
  std::vector<int> public_idx_;
};

int run(int argc, char** argv) {
  CLI::App app{"Leaderboard mechanism engine and adversarial benchmark"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "suppress progress output on stderr");
  app.set_config("--config", "", "read default option values from an INI file");

  // ---- init
  auto* init = app.add_subcommand("init", "create a competition directory");
  std::string init_id = "competition", init_loss = "zero_one",
              init_mech = "ladder-pf", init_out, init_truth;
  long init_n = 0;
  double init_fraction = 1.0 / 3.0, init_eta = 0.0, init_alpha = 1e-5,
         init_raw_scale = 1.0;
  std::uint64_t init_seed = 0;
  bool init_force = false;
  init->add_option("--id", init_id, "competition id");
  init->add_option("--n", init_n, "total number of test labels")->required();
  init->add_option("--public-fraction", init_fraction,
                   "fraction of labels scored on the public board");
  init->add_option("--loss", init_loss, "zero_one or clipped_log");
  init->add_option("--mechanism", init_mech, "ladder, ladder-pf or kaggle");
  init->add_option("--eta", init_eta, "ladder step size (0 = default rule)");
  init->add_option("--alpha", init_alpha, "kaggle rounding parameter");
  init->add_option("--raw-scale", init_raw_scale,
                   "display factor for losses scored on a wider raw range");
  auto* init_seed_opt = init->add_option("--seed", init_seed, "split/truth seed");
  init->add_option("--truth", init_truth,
                   "truth label file (default: seeded random binary labels)");
  init->add_option("--out", init_out, "competition directory")->required();
  init->add_flag("--force", init_force, "overwrite an existing competition");

  // ---- submit
  auto* submit = app.add_subcommand("submit", "score one submission file");
  std::string submit_dir, submit_team, submit_file;
  submit->add_option("dir", submit_dir, "competition directory")->required();
  submit->add_option("--team", submit_team, "team id")->required();
  submit->add_option("--file", submit_file, "submission file")->required();

  // ---- leaderboard
  auto* lb = app.add_subcommand("leaderboard", "print a leaderboard");
  std::string lb_dir, lb_board = "public";
  lb->add_option("dir", lb_dir, "competition directory")->required();
  lb->add_option("--board", lb_board, "public or private");

  // ---- close
  auto* close_cmd =
      app.add_subcommand("close", "close a competition; unseals the private board");
  std::string close_dir;
  close_cmd->add_option("dir", close_dir, "competition directory")->required();

  // ---- attack
  auto* attack = app.add_subcommand(
      "attack", "run the boosting attack against a synthetic competition");
  long atk_k = 400, atk_n_total = 12000, atk_n_public = 4000;
  std::string atk_mech = "kaggle", atk_variant = "threshold-half", atk_out = "attack";
  double atk_eta = 0.0, atk_alpha = 1e-5;
  std::uint64_t atk_seed = 0;
  attack->add_option("--k", atk_k, "submission budget");
  attack->add_option("--n-total", atk_n_total, "total label count");
  attack->add_option("--n-public", atk_n_public, "public split size");
  attack->add_option("--mechanism", atk_mech, "ladder, ladder-pf or kaggle");
  attack->add_option("--eta", atk_eta, "ladder step size");
  attack->add_option("--alpha", atk_alpha, "kaggle rounding parameter");
  attack->add_option("--variant", atk_variant,
                     "threshold-half or improvement-selected");
  auto* atk_seed_opt = attack->add_option("--seed", atk_seed, "attack seed");
  attack->add_option("--out", atk_out, "output prefix");

  // ---- experiment
  auto* exp = app.add_subcommand("experiment", "run a full-scale simulation study");
  bool exp_boosting = false, exp_stability = false;
  long exp_N = 12000, exp_n = 4000, exp_k = 400;
  int exp_reps = 5;
  std::uint64_t exp_seed = 0;
  std::string exp_out = "experiment", exp_fixture;
  exp->add_flag("--boosting", exp_boosting, "boosting-attack comparison");
  exp->add_flag("--split-stability", exp_stability,
                "split-stability study over a fixture log");
  exp->add_option("--N", exp_N, "total label count");
  exp->add_option("--n", exp_n, "public split size");
  exp->add_option("--k", exp_k, "submission budget");
  exp->add_option("--reps", exp_reps, "independent repetitions");
  auto* exp_seed_opt = exp->add_option("--seed", exp_seed, "experiment seed");
  exp->add_option("--fixture", exp_fixture, "fixture log (split-stability)");
  exp->add_option("--out", exp_out, "output prefix");

  // ---- replay
  auto* replay = app.add_subcommand(
      "replay", "replay a fixture log and diff two mechanisms");
  std::string rp_fixture, rp_mech = "ladder-pf", rp_compare = "kaggle",
              rp_out = "replay";
  double rp_eta = 0.0, rp_alpha = 1e-5;
  int rp_top = 10;
  replay->add_option("--fixture", rp_fixture, "fixture log (JSONL)")->required();
  replay->add_option("--mechanism", rp_mech, "mechanism to replay");
  replay->add_option("--compare", rp_compare,
                     "second mechanism for the perturbation diff");
  replay->add_option("--eta", rp_eta, "ladder step size");
  replay->add_option("--alpha", rp_alpha, "kaggle rounding parameter");
  replay->add_option("--top", rp_top, "perturbation window");
  replay->add_option("--out", rp_out, "output prefix");

  // ---- significance
  auto* sig = app.add_subcommand(
      "significance", "paired t-tests of rank 1 against ranks 2..m");
  std::string sig_fixture, sig_planted, sig_out = "significance";
  int sig_top = 10;
  double sig_level = 0.05;
  sig->add_option("--fixture", sig_fixture,
                  "competition fixture log; tests top --top teams");
  sig->add_option("--planted", sig_planted, "planted loss-vector fixture (JSON)");
  sig->add_option("--top", sig_top, "number of top submissions");
  sig->add_option("--level", sig_level, "family-wise significance level");
  sig->add_option("--out", sig_out, "output prefix");

  // ---- fixtures
  auto* fix = app.add_subcommand("fixtures", "generate synthetic fixtures");
  std::string fix_kind = "competition", fix_out = "fixture.jsonl";
  long fix_n = 12000, fix_subs = 1785, fix_priv_n = 8400;
  int fix_teams = 200, fix_top = 10;
  double fix_fraction = 0.3, fix_shift = 0.01, fix_noise = 0.02;
  std::vector<int> fix_planted{8, 9};
  std::uint64_t fix_seed = 0;
  fix->add_option("--kind", fix_kind, "competition or planted");
  fix->add_option("--n", fix_n, "total label count (competition)");
  fix->add_option("--teams", fix_teams, "team count (competition)");
  fix->add_option("--submissions", fix_subs, "submission count (competition)");
  fix->add_option("--public-fraction", fix_fraction, "public split fraction");
  fix->add_option("--n-private", fix_priv_n, "private size (planted)");
  fix->add_option("--top", fix_top, "number of submissions (planted)");
  fix->add_option("--planted-ranks", fix_planted, "ranks carrying a shift");
  fix->add_option("--shift", fix_shift, "planted per-example shift");
  fix->add_option("--noise", fix_noise, "planted noise std");
  auto* fix_seed_opt = fix->add_option("--seed", fix_seed, "fixture seed");
  fix->add_option("--out", fix_out, "output file");

  CLI11_PARSE(app, argc, argv);

  if (init->parsed()) {
    const std::uint64_t seed = resolve_seed(init_seed_opt, init_seed);
    CompetitionSpec spec;
    spec.id = init_id;
    spec.n_total = init_n;
    spec.loss = loss_kind_from_string(init_loss);
    if (spec.loss == LossKind::ZeroOne) spec.alphabet = {0.0, 1.0};
    spec.mechanism = MechanismSpec::parse(init_mech, init_eta, init_alpha);
    spec.raw_scale = init_raw_scale;
    std::tie(spec.public_idx, spec.private_idx) =
        split_assign(init_n, init_fraction, seed);

    LabelVector truth;
    if (!init_truth.empty()) {
      truth = parse_submission_file(read_file(init_truth), init_n, spec.alphabet);
    } else {
      Rng rng(derive_seed(seed, 0x7247));
      truth.resize(static_cast<std::size_t>(init_n));
      for (auto& y : truth) y = static_cast<double>(rng.bit());
    }
    Competition::create(init_out, spec, truth, init_force);
    note("created competition '" + init_id + "' at " + init_out + " (public " +
         std::to_string(spec.public_idx.size()) + " / private " +
         std::to_string(spec.private_idx.size()) + ", seed " +
         std::to_string(seed) + ")");
    return 0;
  }

  if (submit->parsed()) {
    Competition comp = Competition::open(submit_dir);
    const auto result = comp.submit_file(
        submit_team, read_file(submit_file),
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    json score = result.score;  // full stored precision
    std::cout << score.dump() << '\n';
    note("seq " + std::to_string(result.seq) + ", digest " + result.digest);
    return 0;
  }

  if (lb->parsed()) {
    Competition comp = Competition::open(lb_dir);
    if (lb_board == "public") {
      std::cout << board_to_json(comp.public_board()).dump(2) << '\n';
    } else if (lb_board == "private") {
      if (!comp.spec().closed)
        throw std::runtime_error("private board is sealed while the competition is open");
      std::cout << board_to_json(comp.private_board()).dump(2) << '\n';
    } else {
      throw std::invalid_argument("--board must be public or private");
    }
    return 0;
  }

  if (close_cmd->parsed()) {
    Competition comp = Competition::open(close_dir);
    comp.close();
    note("closed competition '" + comp.spec().id + "'");
    return 0;
  }

  if (attack->parsed()) {
    const std::uint64_t seed = resolve_seed(atk_seed_opt, atk_seed);
    Rng truth_rng(derive_seed(seed, 1));
    LabelVector truth(static_cast<std::size_t>(atk_n_total));
    for (auto& y : truth) y = static_cast<double>(truth_rng.bit());
    auto [public_idx, private_idx] = split_assign(
        atk_n_total, static_cast<double>(atk_n_public) / atk_n_total,
        derive_seed(seed, 2));

    Mechanism mech(MechanismSpec::parse(atk_mech, atk_eta, atk_alpha),
                   static_cast<long>(public_idx.size()));
    const double chance = grid_round(0.5, mech.grid());
    MechanismOracle oracle(std::move(mech), truth, public_idx);
    AttackConfig cfg;
    cfg.k = atk_k;
    cfg.n_total = atk_n_total;
    cfg.seed = derive_seed(seed, 3);
    cfg.chance_level = chance;
    cfg.variant = atk_variant == "improvement-selected"
                      ? AttackConfig::Variant::ImprovementSelected
                      : AttackConfig::Variant::ThresholdHalf;
    AttackReport report = boosting_attack(oracle, cfg);
    report.public_true_loss =
        empirical_loss(LossKind::ZeroOne, report.final_vector, truth, public_idx);
    report.heldout_true_loss =
        empirical_loss(LossKind::ZeroOne, report.final_vector, truth, private_idx);

    std::ostringstream csv;
    csv << "step,reported,selected\n";
    json num;
    for (std::size_t t = 0; t < report.reported_losses.size(); ++t) {
      num = report.reported_losses[t];
      csv << t + 1 << ',' << num.dump() << ','
          << static_cast<int>(report.selected[t]) << '\n';
    }
    write_report(
        atk_out, csv.str(),
        json{{"experiment", "attack"},
             {"mechanism", atk_mech},
             {"variant", atk_variant},
             {"k", atk_k},
             {"n_total", atk_n_total},
             {"n_public", atk_n_public},
             {"selected_count", report.selected_count},
             {"public_true_loss", report.public_true_loss},
             {"heldout_true_loss", report.heldout_true_loss}},
        seed);
    std::cout << "public_true_loss=" << report.public_true_loss
              << " heldout_true_loss=" << report.heldout_true_loss << '\n';
    return 0;
  }

  if (exp->parsed()) {
    if (exp_boosting == exp_stability)
      throw std::invalid_argument("pick exactly one of --boosting / --split-stability");
    const std::uint64_t seed = resolve_seed(exp_seed_opt, exp_seed);
    if (exp_boosting) {
      BoostingConfig cfg;
      cfg.n_total = exp_N;
      cfg.n_public = exp_n;
      cfg.k = exp_k;
      cfg.reps = exp_reps;
      cfg.seed = seed;
      const BoostingReport report = run_boosting_experiment(cfg);
      std::ostringstream csv;
      write_boosting_csv(report, csv);
      write_report(exp_out, csv.str(), boosting_summary(report), seed);
      for (const auto& s : report.settings)
        std::cout << s.name << " mean_final_reported="
                  << s.mean_final_reported() << '\n';
    } else {
      if (exp_fixture.empty())
        throw std::invalid_argument("--split-stability needs --fixture");
      const CompetitionFixture fx = read_fixture_jsonl(exp_fixture);
      const ReplayResult replayed =
          replay_competition(fx, MechanismSpec::parse("ladder-pf", 0, 0));
      const auto rows = run_split_stability(replayed.private_losses, exp_reps, seed);
      std::ostringstream csv;
      csv << "id,full_score,mean_half,std_half\n";
      json num;
      for (const auto& r : rows) {
        csv << r.id << ',';
        num = r.full_score;
        csv << num.dump() << ',';
        num = r.mean_half;
        csv << num.dump() << ',';
        num = r.std_half;
        csv << num.dump() << '\n';
      }
      write_report(exp_out, csv.str(),
                   json{{"experiment", "split-stability"},
                        {"fixture", exp_fixture},
                        {"reps", exp_reps},
                        {"submissions", rows.size()}},
                   seed);
    }
    return 0;
  }

  if (replay->parsed()) {
    const CompetitionFixture fx = read_fixture_jsonl(rp_fixture);
    const ReplayResult a =
        replay_competition(fx, MechanismSpec::parse(rp_mech, rp_eta, rp_alpha));
    const ReplayResult b = replay_competition(
        fx, MechanismSpec::parse(rp_compare, rp_eta, rp_alpha));
    const auto diff = perturbation_diff(a.public_board, b.public_board, rp_top);
    const auto priv_diff =
        perturbation_diff(a.private_board, b.private_board, rp_top);

    json jdiff = json::array(), jpriv = json::array();
    for (const auto& d : diff)
      jdiff.push_back({{"team", d.team}, {"rank_a", d.rank_a}, {"rank_b", d.rank_b}});
    for (const auto& d : priv_diff)
      jpriv.push_back({{"team", d.team}, {"rank_a", d.rank_a}, {"rank_b", d.rank_b}});

    write_text(rp_out + ".public_a.csv", board_csv(a.public_board));
    write_text(rp_out + ".public_b.csv", board_csv(b.public_board));
    write_text(rp_out + ".private_a.csv", board_csv(a.private_board));
    write_text(rp_out + ".private_b.csv", board_csv(b.private_board));
    write_text(rp_out + ".json",
               json{{"experiment", "replay"},
                    {"mechanism_a", rp_mech},
                    {"mechanism_b", rp_compare},
                    {"top", rp_top},
                    {"public_perturbations", jdiff},
                    {"private_perturbations", jpriv}}
                       .dump(2) +
                   "\n");
    std::cout << json{{"public_perturbations", jdiff},
                      {"private_perturbations", jpriv}}
                     .dump(2)
              << '\n';
    return 0;
  }

  if (sig->parsed()) {
    std::vector<Eigen::VectorXd> losses;
    std::vector<int> expected_planted;
    if (!sig_planted.empty()) {
      const json j = json::parse(read_file(sig_planted));
      for (const auto& v : j.at("losses")) {
        const auto vec = v.get<std::vector<double>>();
        losses.emplace_back(Eigen::Map<const Eigen::VectorXd>(
            vec.data(), static_cast<Eigen::Index>(vec.size())));
      }
      if (j.contains("planted_ranks"))
        expected_planted = j.at("planted_ranks").get<std::vector<int>>();
    } else if (!sig_fixture.empty()) {
      const CompetitionFixture fx = read_fixture_jsonl(sig_fixture);
      const ReplayResult replayed =
          replay_competition(fx, MechanismSpec::parse("kaggle", 0, 1e-5));
      for (const auto& e : replayed.public_board) {
        if (e.rank > sig_top) break;
        for (const auto& [team, lv] : replayed.private_losses)
          if (team == e.team) losses.push_back(lv);
      }
    } else {
      throw std::invalid_argument("significance needs --fixture or --planted");
    }
    if (static_cast<int>(losses.size()) > sig_top)
      losses.resize(static_cast<std::size_t>(sig_top));

    const auto rows = run_significance_analysis(losses, sig_level);
    std::ostringstream csv;
    csv << "rank,statistic,p_raw,p_corrected,significant,degenerate\n";
    json num;
    json flagged = json::array();
    for (const auto& r : rows) {
      num = r.statistic;
      csv << r.rank << ',' << num.dump() << ',';
      num = r.p_raw;
      csv << num.dump() << ',';
      num = r.p_corrected;
      csv << num.dump() << ',' << (r.significant ? 1 : 0) << ','
          << (r.degenerate ? 1 : 0) << '\n';
      if (r.significant) flagged.push_back(r.rank);
    }
    json summary{{"experiment", "significance"},
                 {"level", sig_level},
                 {"comparisons", rows.size()},
                 {"flagged_ranks", flagged}};
    if (!expected_planted.empty()) summary["planted_ranks"] = expected_planted;
    summary["volatile"] = volatile_sidecar_fields();
    write_text(sig_out + ".csv", csv.str());
    write_text(sig_out + ".json", summary.dump(2) + "\n");
    std::cout << flagged.dump() << '\n';
    return 0;
  }

  if (fix->parsed()) {
    const std::uint64_t seed = resolve_seed(fix_seed_opt, fix_seed);
    if (fix_kind == "competition") {
      FixtureConfig cfg;
      cfg.n_total = fix_n;
      cfg.public_fraction = fix_fraction;
      cfg.teams = fix_teams;
      cfg.submissions = fix_subs;
      cfg.seed = seed;
      write_fixture_jsonl(make_competition_fixture(cfg), fix_out);
      note("wrote competition fixture " + fix_out + " (seed " +
           std::to_string(seed) + ")");
    } else if (fix_kind == "planted") {
      const PlantedFixture fx = make_planted_significance_fixture(
          fix_priv_n, fix_top, fix_planted, fix_shift, fix_noise, seed);
      json losses = json::array();
      for (const auto& v : fx.private_losses)
        losses.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      write_text(fix_out, json{{"v", 1},
                               {"n", fix_priv_n},
                               {"seed", seed},
                               {"planted_ranks", fx.planted_ranks},
                               {"losses", losses}}
                              .dump() +
                          "\n");
      note("wrote planted fixture " + fix_out + " (seed " +
           std::to_string(seed) + ")");
    } else {
      throw std::invalid_argument("--kind must be competition or planted");
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
