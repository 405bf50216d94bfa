#include "ladder/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ladder {

double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  if (n < 2) throw std::invalid_argument("sample_std needs length >= 2");
  const double mean = v.mean();
  const double ss = (v.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1));
}

TTestResult paired_t(const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("paired_t requires equal lengths");
  const Eigen::Index n = u.size();
  if (n < 2) throw std::invalid_argument("paired_t needs length >= 2");
  const Eigen::VectorXd d = u - v;
  const double s = sample_std(d);
  if (s == 0.0) throw DegenerateDifferenceError{};
  const double t = std::sqrt(static_cast<double>(n)) * d.mean() / s;
  const long dof = static_cast<long>(n) - 1;
  return TTestResult{t, dof, t_to_p(t, dof)};
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 3e-16;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("beta parameters must be positive");
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("incomplete beta argument outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_to_p(double statistic, long dof) {
  if (dof < 1) throw std::invalid_argument("dof must be >= 1");
  if (statistic == 0.0) return 0.5;
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + statistic * statistic);
  const double tail = 0.5 * regularized_incomplete_beta(nu / 2.0, 0.5, x);
  return statistic > 0.0 ? tail : 1.0 - tail;
}

std::vector<double> bonferroni(std::span<const double> p_values) {
  const double m = static_cast<double>(p_values.size());
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("p-value outside [0,1]");
    out.push_back(std::min(1.0, p * m));
  }
  return out;
}

double hoeffding_epsilon(long k, long n, double delta) {
  if (k < 1 || n < 1) throw std::invalid_argument("k and n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
  return std::sqrt(std::log(2.0 * static_cast<double>(k) / delta) /
                   (2.0 * static_cast<double>(n)));
}

double leaderboard_error(std::span<const double> true_losses,
                         std::span<const double> reported) {
  if (true_losses.size() != reported.size() || true_losses.empty())
    throw std::invalid_argument("leaderboard_error needs equal nonempty lengths");
  double prefix_min = std::numeric_limits<double>::infinity();
  double err = 0.0;
  for (std::size_t t = 0; t < true_losses.size(); ++t) {
    prefix_min = std::min(prefix_min, true_losses[t]);
    err = std::max(err, std::fabs(prefix_min - reported[t]));
  }
  return err;
}

}  // namespace ladder
