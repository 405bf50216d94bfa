#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ladder/mechanisms.hpp"
#include "ladder/rng.hpp"

using namespace ladder;

namespace {

LossVector constant_losses(long n, double mean) {
  return Eigen::VectorXd::Constant(n, mean);
}

}  // namespace

TEST_SUITE("mechanisms") {

TEST_CASE("ladder step follows the release rule") {
  LadderState s;
  s.eta = 0.01;
  // First submission always releases (sentinel-infinity incumbent).
  CHECK(ladder_step(s, 0.50) == doctest::Approx(0.50).epsilon(1e-14));
  CHECK(s.best_reported.has_value());

  s.best_reported = 0.35;
  CHECK(ladder_step(s, 0.342) == doctest::Approx(0.35));  // 0.342 >= 0.34
  CHECK(*s.best_reported == doctest::Approx(0.35));
  CHECK(ladder_step(s, 0.33) == doctest::Approx(0.33).epsilon(1e-14));
  CHECK(*s.best_reported == doctest::Approx(0.33).epsilon(1e-14));
}

TEST_CASE("ladder equality at the threshold never updates") {
  LadderState s;
  s.eta = 0.01;
  s.best_reported = 0.35;
  CHECK(ladder_step(s, 0.34) == doctest::Approx(0.35));  // strict inequality
}

TEST_CASE("parameter-free ladder anchors") {
  const long n = 100;
  LadderPFState s;
  s.best_loss_vector = Eigen::VectorXd::Zero(n);
  CHECK(ladder_pf_step(s, constant_losses(n, 0.5)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  // Strict-inequality boundary: best 0.40, diff std 0.5 -> threshold 0.35.
  // A candidate mean just above the threshold stays; just below releases.
  const auto boundary_state = [n] {
    LadderPFState b;
    b.best_reported = 0.40;
    b.best_loss_vector = Eigen::VectorXd::Constant(n, 0.35);
    return b;
  };
  Eigen::VectorXd cand(n);
  const double c = 0.5 * std::sqrt(99.0 / 100.0);  // sample std ~ 0.5
  for (long i = 0; i < n; ++i) cand[i] = 0.35 + (i < n / 2 ? c : -c);
  LadderPFState above = boundary_state();
  CHECK(ladder_pf_step(above, cand.array() + 1e-6) == doctest::Approx(0.40));
  CHECK(*above.best_reported == doctest::Approx(0.40));
  LadderPFState below = boundary_state();
  CHECK(ladder_pf_step(below, cand.array() - 1e-6) == doctest::Approx(0.35));

  // Resubmitting the incumbent vector: s = 0, equality, unchanged.
  LadderPFState r;
  r.best_loss_vector = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v(n);
  Rng rng(5);
  for (long i = 0; i < n; ++i) v[i] = static_cast<double>(rng.bit());
  const double first = ladder_pf_step(r, v);
  CHECK(ladder_pf_step(r, v) == first);
  CHECK(r.updates_emitted == 1);
}

TEST_CASE("kaggle step is stateless grid rounding") {
  CHECK(kaggle_step(0.123456, 0.00001) ==
        doctest::Approx(0.12346).epsilon(1e-12));
  CHECK(kaggle_step(0.5, 0.0158) == doctest::Approx(0.0158 * 32).epsilon(1e-14));
  CHECK(kaggle_step(0.12, 0.01) == doctest::Approx(0.12).epsilon(1e-14));
}

TEST_CASE("kaggle reports can oscillate; ladder reports cannot") {
  Mechanism kaggle(MechanismSpec::parse("kaggle", 0, 0.01), 10);
  std::vector<double> stream{0.5, 0.3, 0.6, 0.2, 0.7};
  bool rose = false;
  double prev = kaggle.step_mean(stream[0]);
  for (std::size_t i = 1; i < stream.size(); ++i) {
    const double r = kaggle.step_mean(stream[i]);
    rose = rose || r > prev;
    prev = r;
  }
  CHECK(rose);

  Mechanism ladder(MechanismSpec::parse("ladder", 0.05, 0), 10);
  prev = ladder.step_mean(stream[0]);
  for (std::size_t i = 1; i < stream.size(); ++i) {
    const double r = ladder.step_mean(stream[i]);
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("ladder distinct reports stay within the update-count bound") {
  Rng rng(2024);
  for (double eta : {0.1, 0.05, 0.01}) {
    const long bound = static_cast<long>(std::ceil(2.0 / eta)) + 1;
    for (int stream = 0; stream < 50; ++stream) {
      LadderState s;
      s.eta = eta;
      std::set<double> distinct;
      for (int t = 0; t < 1000; ++t) distinct.insert(ladder_step(s, rng.real()));
      CHECK(static_cast<long>(distinct.size()) <= bound);
      CHECK(s.updates_emitted == static_cast<long>(distinct.size()));
    }
  }
}

TEST_CASE("all reports lie on the mechanism grid") {
  Rng rng(77);
  const long n = 50;
  Mechanism ladder(MechanismSpec::parse("ladder", 0.03, 0), n);
  Mechanism pf(MechanismSpec::parse("ladder-pf", 0, 0), n);
  Mechanism kaggle(MechanismSpec::parse("kaggle", 0, 1e-3), n);
  for (int t = 0; t < 200; ++t) {
    LossVector lv(n);
    for (long i = 0; i < n; ++i) lv[i] = static_cast<double>(rng.bit());
    CHECK(on_grid(ladder.step(lv), 0.03));
    CHECK(on_grid(pf.step(lv), 1.0 / static_cast<double>(n)));
    CHECK(on_grid(kaggle.step(lv), 1e-3));
  }
}

TEST_CASE("default eta follows the cube-root rule") {
  CHECK(default_ladder_eta(4000) ==
        doctest::Approx(0.1606616458113626).epsilon(1e-12));
  CHECK(default_ladder_eta(4000, 400) ==
        doctest::Approx(std::cbrt(std::log(400.0 * 4000.0) / 4000.0))
            .epsilon(1e-12));
}

TEST_CASE("mechanism snapshots round-trip mid-stream") {
  Rng rng(13);
  for (const char* kind : {"ladder", "ladder-pf", "kaggle"}) {
    Mechanism m(MechanismSpec::parse(kind, 0.02, 1e-4), 20);
    for (int t = 0; t < 7; ++t) {
      LossVector lv(20);
      for (long i = 0; i < 20; ++i) lv[i] = static_cast<double>(rng.bit());
      m.step(lv);
    }
    Mechanism copy = Mechanism::from_snapshot(m.snapshot());
    for (int t = 0; t < 7; ++t) {
      LossVector lv(20);
      for (long i = 0; i < 20; ++i) lv[i] = static_cast<double>(rng.bit());
      CHECK(copy.step(lv) == m.step(lv));
    }
    CHECK(copy.steps_seen() == m.steps_seen());
  }
}

TEST_CASE("replaying the same stream reproduces identical reports") {
  Rng rng(31);
  std::vector<LossVector> stream;
  for (int t = 0; t < 40; ++t) {
    LossVector lv(30);
    for (long i = 0; i < 30; ++i) lv[i] = static_cast<double>(rng.bit());
    stream.push_back(lv);
  }
  for (const char* kind : {"ladder", "ladder-pf", "kaggle"}) {
    Mechanism a(MechanismSpec::parse(kind, 0.05, 1e-5), 30);
    Mechanism b(MechanismSpec::parse(kind, 0.05, 1e-5), 30);
    for (const auto& lv : stream) {
      const double ra = a.step(lv), rb = b.step(lv);
      CHECK(ra == rb);  // bit-for-bit
    }
  }
}

TEST_CASE("per-team board example script") {
  PerTeamBoard board(MechanismSpec::parse("ladder", 0.01, 0), 10);
  board.submit("A", constant_losses(10, 0.3));
  board.submit("B", constant_losses(10, 0.4));
  auto e = board.entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].team == "A");
  CHECK(e[0].score == doctest::Approx(0.3));
  CHECK(e[1].team == "B");

  board.submit("B", constant_losses(10, 0.25));
  e = board.entries();
  CHECK(e[0].team == "B");
  CHECK(e[0].score == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(e[1].team == "A");

  // No improvement: leaderboard unchanged, submission count advances.
  board.submit("B", constant_losses(10, 0.25));
  const auto e2 = board.entries();
  CHECK(e2[0].team == "B");
  CHECK(e2[0].score == e[0].score);
  CHECK(e2[0].submissions == 3);
}

TEST_CASE("per-team ties rank the earlier achiever first") {
  PerTeamBoard board(MechanismSpec::parse("kaggle", 0, 1e-5), 10);
  board.submit("late", constant_losses(10, 0.5));
  board.submit("early", constant_losses(10, 0.3));
  board.submit("late", constant_losses(10, 0.3));
  const auto e = board.entries();
  CHECK(e[0].team == "early");
  CHECK(e[1].team == "late");
  CHECK(e[0].score == e[1].score);
}

TEST_CASE("per-rank board placement script") {
  PerRankBoard board(MechanismSpec::parse("ladder", 0.01, 0), 10);
  CHECK(board.submit(constant_losses(10, 0.30)) == 1);  // first ever
  CHECK(board.submit(constant_losses(10, 0.35)) == 2);  // fails rank 1
  CHECK(board.submit(constant_losses(10, 0.25)) == 1);  // displaces downward
  const auto scores = board.scores();
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(scores[1] == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(scores[2] == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("per-rank board respects the size cap") {
  PerRankBoard board(MechanismSpec::parse("ladder", 0.01, 0), 10, 2);
  CHECK(board.submit(constant_losses(10, 0.30)).has_value());
  CHECK(board.submit(constant_losses(10, 0.35)).has_value());
  // Worse than every rank and the board cannot grow.
  CHECK_FALSE(board.submit(constant_losses(10, 0.50)).has_value());
  CHECK(board.size() == 2);
}

TEST_CASE("per-rank board rejects the stateless mechanism") {
  CHECK_THROWS_AS(PerRankBoard(MechanismSpec::parse("kaggle", 0, 1e-5), 10),
                  std::invalid_argument);
}

TEST_CASE("mechanism spec JSON round trip") {
  for (const char* kind : {"ladder", "ladder-pf", "kaggle"}) {
    const MechanismSpec spec = MechanismSpec::parse(kind, 0.025, 1e-4);
    const MechanismSpec back = MechanismSpec::from_json(spec.to_json());
    CHECK(back.kind == spec.kind);
    CHECK(back.eta == spec.eta);
    CHECK(back.alpha == spec.alpha);
  }
  CHECK_THROWS_AS(MechanismSpec::parse("bogus", 0, 0), std::invalid_argument);
}

}  // TEST_SUITE
