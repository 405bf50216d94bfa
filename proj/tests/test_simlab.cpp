#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "ladder/rng.hpp"
#include "ladder/simlab.hpp"

using namespace ladder;
namespace fs = std::filesystem;

TEST_SUITE("simlab") {

TEST_CASE("boosting experiment is a pure function of the seed") {
  BoostingConfig cfg;
  cfg.n_total = 600;
  cfg.n_public = 200;
  cfg.k = 30;
  cfg.reps = 2;
  cfg.seed = 5;
  const BoostingReport a = run_boosting_experiment(cfg);
  const BoostingReport b = run_boosting_experiment(cfg);
  REQUIRE(a.settings.size() == b.settings.size());
  for (std::size_t s = 0; s < a.settings.size(); ++s)
    for (std::size_t r = 0; r < a.settings[s].reps.size(); ++r) {
      CHECK(a.settings[s].reps[r].reported_best ==
            b.settings[s].reps[r].reported_best);
      CHECK(a.settings[s].reps[r].public_true ==
            b.settings[s].reps[r].public_true);
      CHECK(a.settings[s].reps[r].heldout_true ==
            b.settings[s].reps[r].heldout_true);
    }
  std::ostringstream csv1, csv2;
  write_boosting_csv(a, csv1);
  write_boosting_csv(b, csv2);
  CHECK(csv1.str() == csv2.str());
}

TEST_CASE("with k = 1 every trace reduces to the first report") {
  BoostingConfig cfg;
  cfg.n_total = 300;
  cfg.n_public = 100;
  cfg.k = 1;
  cfg.reps = 3;
  cfg.seed = 2;
  const BoostingReport report = run_boosting_experiment(cfg);
  for (const auto& setting : report.settings)
    for (const auto& tr : setting.reps) {
      REQUIRE(tr.reported_best.size() == 1);
      // One submission: reported best equals its own (grid-rounded) loss.
      const double grid =
          Mechanism(setting.mechanism, cfg.n_public).grid();
      CHECK(std::abs(tr.reported_best[0] - tr.public_true[0]) <=
            grid / 2 + 1e-12);
    }
}

TEST_CASE("split-stability grand means equal the full score") {
  Rng rng(21);
  std::vector<std::pair<std::string, Eigen::VectorXd>> losses;
  for (int s = 0; s < 4; ++s) {
    Eigen::VectorXd v(500);  // even: the two half-means average exactly
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.real();
    losses.emplace_back("s" + std::to_string(s), v);
  }
  const auto rows = run_split_stability(losses, 20, 7);
  for (const auto& row : rows) {
    CHECK(std::abs(row.mean_half - row.full_score) <= 1e-12);
    CHECK(row.std_half > 0.0);
  }
}

TEST_CASE("odd lengths run via the extra-example coin, means stay close") {
  Rng rng(22);
  Eigen::VectorXd v(501);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.real();
  const auto rows =
      run_split_stability({{"odd", v}}, 40, 13);
  // Halves of 250/251 bias the grand mean by at most O(1/n); only the
  // even case admits an exact identity.
  CHECK(std::abs(rows[0].mean_half - rows[0].full_score) <= 1.0 / 250.0);
}

TEST_CASE("constant losses have zero split variance") {
  std::vector<std::pair<std::string, Eigen::VectorXd>> losses{
      {"flat", Eigen::VectorXd::Constant(400, 0.25)}};
  const auto rows = run_split_stability(losses, 20, 3);
  CHECK(rows[0].std_half == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rows[0].full_score == doctest::Approx(0.25));
}

TEST_CASE("balanced binary losses match the sampling oracle") {
  // Half the examples cost 1: the half-score std follows sampling without
  // replacement from a finite population.
  Eigen::VectorXd v(4000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = i % 2 == 0 ? 1.0 : 0.0;
  std::vector<std::pair<std::string, Eigen::VectorXd>> losses{{"bal", v}};
  const auto rows = run_split_stability(losses, 200, 11);
  const double oracle = half_score_std_oracle(v);
  CHECK(rows[0].std_half == doctest::Approx(oracle).epsilon(0.15));
}

TEST_CASE("significance pipeline flags exactly the planted ranks") {
  const PlantedFixture fx =
      make_planted_significance_fixture(8400, 10, {8, 9}, 0.01, 0.02, 31);
  const auto rows = run_significance_analysis(fx.private_losses, 0.05);
  REQUIRE(rows.size() == 9);
  std::set<int> flagged;
  for (const auto& r : rows)
    if (r.significant) flagged.insert(r.rank);
  CHECK(flagged == std::set<int>{8, 9});
  // Non-planted ranks are permutations of rank 1: mean difference is
  // exactly zero, so their statistics vanish identically.
  for (const auto& r : rows)
    if (!flagged.count(r.rank)) CHECK(r.statistic == doctest::Approx(0.0));
}

TEST_CASE("degenerate duplicates are excluded from the correction count") {
  Eigen::VectorXd base(100);
  Rng rng(17);
  for (Eigen::Index i = 0; i < 100; ++i) base[i] = rng.real();
  Eigen::VectorXd shifted = base.array() + 0.05;
  const auto rows = run_significance_analysis({base, base, shifted}, 0.05);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].degenerate);
  CHECK_FALSE(rows[0].significant);
  CHECK_FALSE(rows[1].degenerate);
  // Only one real comparison: corrected == raw.
  CHECK(rows[1].p_corrected == doctest::Approx(rows[1].p_raw));
}

TEST_CASE("two submissions mean correction factor one") {
  Eigen::VectorXd u(50), v(50);
  Rng rng(23);
  for (Eigen::Index i = 0; i < 50; ++i) {
    u[i] = rng.real();
    v[i] = rng.real();
  }
  const auto rows = run_significance_analysis({u, v}, 0.05);
  CHECK(rows[0].p_corrected == doctest::Approx(rows[0].p_raw));
}

TEST_CASE("competition fixture matches the requested shape") {
  FixtureConfig cfg;
  cfg.n_total = 600;
  cfg.public_fraction = 0.3;
  cfg.teams = 5;
  cfg.submissions = 23;
  cfg.seed = 9;
  const CompetitionFixture fx = make_competition_fixture(cfg);
  CHECK(fx.truth.size() == 600);
  CHECK(fx.public_idx.size() == 180);
  CHECK(fx.private_idx.size() == 420);
  CHECK(fx.events.size() == 23);
  std::set<std::string> teams;
  long prev_ts = 0;
  for (const auto& ev : fx.events) {
    CHECK(ev.labels.size() == 600);
    CHECK(ev.ts > prev_ts);
    prev_ts = ev.ts;
    teams.insert(ev.team);
  }
  CHECK(teams.size() == 5);
  CHECK(teams.count("team000") == 1);
}

TEST_CASE("fixture JSONL round trip is exact") {
  FixtureConfig cfg;
  cfg.n_total = 200;
  cfg.teams = 3;
  cfg.submissions = 7;
  cfg.seed = 4;
  const CompetitionFixture fx = make_competition_fixture(cfg);
  const fs::path path =
      fs::temp_directory_path() / "ladder_test_fixture.jsonl";
  write_fixture_jsonl(fx, path);
  const CompetitionFixture back = read_fixture_jsonl(path);
  CHECK(back.truth == fx.truth);
  CHECK(back.public_idx == fx.public_idx);
  CHECK(back.private_idx == fx.private_idx);
  REQUIRE(back.events.size() == fx.events.size());
  for (std::size_t i = 0; i < fx.events.size(); ++i) {
    CHECK(back.events[i].team == fx.events[i].team);
    CHECK(back.events[i].ts == fx.events[i].ts);
    CHECK(back.events[i].labels == fx.events[i].labels);
  }
}

TEST_CASE("one improving team ranks identically under every mechanism") {
  FixtureConfig cfg;
  cfg.n_total = 300;
  cfg.teams = 1;
  cfg.submissions = 10;
  cfg.seed = 6;
  const CompetitionFixture fx = make_competition_fixture(cfg);
  const ReplayResult ladder =
      replay_competition(fx, MechanismSpec::parse("ladder-pf", 0, 0));
  const ReplayResult kaggle =
      replay_competition(fx, MechanismSpec::parse("kaggle", 0, 1e-5));
  REQUIRE(ladder.public_board.size() == 1);
  REQUIRE(kaggle.public_board.size() == 1);
  CHECK(ladder.public_board[0].team == kaggle.public_board[0].team);
  CHECK(ladder.public_board[0].rank == kaggle.public_board[0].rank);
  CHECK(perturbation_diff(ladder.public_board, kaggle.public_board, 10).empty());
}

TEST_CASE("perturbation diffs are antisymmetric") {
  FixtureConfig cfg;
  cfg.n_total = 400;
  cfg.teams = 8;
  cfg.submissions = 40;
  cfg.seed = 12;
  const CompetitionFixture fx = make_competition_fixture(cfg);
  const ReplayResult a =
      replay_competition(fx, MechanismSpec::parse("ladder-pf", 0, 0));
  const ReplayResult b =
      replay_competition(fx, MechanismSpec::parse("kaggle", 0, 1e-5));
  const auto ab = perturbation_diff(a.public_board, b.public_board, 10);
  const auto ba = perturbation_diff(b.public_board, a.public_board, 10);
  REQUIRE(ab.size() == ba.size());
  for (const auto& d : ab) {
    bool found = false;
    for (const auto& e : ba)
      found = found ||
              (e.team == d.team && e.rank_a == d.rank_b && e.rank_b == d.rank_a);
    CHECK(found);
  }
}

TEST_CASE("replaying the same fixture twice is identical") {
  FixtureConfig cfg;
  cfg.n_total = 400;
  cfg.teams = 6;
  cfg.submissions = 30;
  cfg.seed = 19;
  const CompetitionFixture fx = make_competition_fixture(cfg);
  const MechanismSpec mech = MechanismSpec::parse("ladder-pf", 0, 0);
  const ReplayResult a = replay_competition(fx, mech);
  const ReplayResult b = replay_competition(fx, mech);
  REQUIRE(a.public_board.size() == b.public_board.size());
  for (std::size_t i = 0; i < a.public_board.size(); ++i) {
    CHECK(a.public_board[i].team == b.public_board[i].team);
    CHECK(a.public_board[i].score == b.public_board[i].score);
    CHECK(a.private_board[i].score == b.private_board[i].score);
  }
}

}  // TEST_SUITE
