#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

namespace ladder {

// Raised when a paired test is asked about two identical loss vectors.
struct DegenerateDifferenceError : std::runtime_error {
  DegenerateDifferenceError()
      : std::runtime_error("paired difference has zero standard deviation") {}
};

struct TTestResult {
  double statistic = 0.0;
  long dof = 0;  // n - 1
  double p_one_sided = 0.0;
};

// (n-1)-normalized sample standard deviation.
double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v);

// t = sqrt(n) * mean(u-v) / std(u-v), upper-tail p with n-1 dof.
TTestResult paired_t(const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v);

// One-sided upper-tail probability of Student's t with `dof` degrees of
// freedom, via the regularized incomplete beta function.
double t_to_p(double statistic, long dof);

// I_x(a,b) by continued fraction, exposed for cross-checks.
double regularized_incomplete_beta(double a, double b, double x);

// Each p multiplied by the number of comparisons, capped at 1.
std::vector<double> bonferroni(std::span<const double> p_values);

// epsilon = sqrt(ln(2k/delta) / (2n)), the non-adaptive uniform envelope.
double hoeffding_epsilon(long k, long n, double delta);

struct ErrorEnvelope {
  double epsilon = 0.0;
  long k = 0;
  long n = 0;
  double delta = 0.0;

  static ErrorEnvelope solve(long k, long n, double delta) {
    return {hoeffding_epsilon(k, n, delta), k, n, delta};
  }
};

// max over t of |prefix-min of true losses - reported[t]|.
double leaderboard_error(std::span<const double> true_losses,
                         std::span<const double> reported);

}  // namespace ladder
