#include "ladder/losses.hpp"

#include <algorithm>
#include <cmath>

namespace ladder {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "zero_one" || s == "01" || s == "zero-one") return LossKind::ZeroOne;
  if (s == "clipped_log" || s == "log" || s == "clipped-log")
    return LossKind::ClippedLog;
  throw std::invalid_argument("unknown loss function: " + s);
}

std::string to_string(LossKind k) {
  return k == LossKind::ZeroOne ? "zero_one" : "clipped_log";
}

double clipped_log_loss(double predicted_prob, double actual) {
  if (!(predicted_prob >= 0.0 && predicted_prob <= 1.0))
    throw std::invalid_argument("predicted probability outside [0,1]");
  if (actual != 0.0 && actual != 1.0)
    throw std::invalid_argument("clipped log loss requires binary truth");
  // Work with the probability assigned to the true label: evaluating
  // log1p(-p) at the clip boundary loses the tail to rounding, so the worst
  // case would no longer saturate at exactly 1.
  const double toward = actual == 1.0 ? predicted_prob : 1.0 - predicted_prob;
  const double p = std::clamp(toward, kLogLossClip, 1.0 - kLogLossClip);
  return std::log(p) / std::log(kLogLossClip);
}

double point_loss(LossKind kind, double predicted, double actual) {
  return kind == LossKind::ZeroOne ? zero_one_loss(predicted, actual)
                                   : clipped_log_loss(predicted, actual);
}

LossVector loss_vector(LossKind kind, std::span<const double> submission,
                       std::span<const double> truth,
                       std::span<const int> subset) {
  LossVector out(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t j = 0; j < subset.size(); ++j) {
    const int i = subset[j];
    if (i < 0 || static_cast<std::size_t>(i) >= submission.size() ||
        static_cast<std::size_t>(i) >= truth.size())
      throw std::invalid_argument("subset index out of range");
    out[static_cast<Eigen::Index>(j)] = point_loss(kind, submission[i], truth[i]);
  }
  return out;
}

double empirical_loss(LossKind kind, std::span<const double> submission,
                      std::span<const double> truth,
                      std::span<const int> subset) {
  if (subset.empty()) throw std::invalid_argument("empty scoring subset");
  return loss_vector(kind, submission, truth, subset).mean();
}

GridValue round_to_grid(double x, double step) {
  return GridValue{grid_round(x, step), step};
}

double grid_round(double x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const double q = x / step;
  const double lo = std::floor(q);
  const double frac = q - lo;
  // Representation error can turn an exact half into 0.4999...; detect ties
  // with a relative tolerance so they deterministically round away from zero.
  const double tie_tol = 1e-9 * (1.0 + std::fabs(q));
  double m;
  if (std::fabs(frac - 0.5) <= tie_tol) {
    m = q >= 0.0 ? lo + 1.0 : lo;  // away from zero
  } else {
    m = std::round(q);
  }
  return m * step;
}

bool on_grid(double x, double step, double tol_ulps) {
  const double r = grid_round(x, step);
  const double scale = std::max({std::fabs(x), step, 1.0});
  return std::fabs(x - r) <=
         tol_ulps * scale * std::numeric_limits<double>::epsilon();
}

}  // namespace ladder
