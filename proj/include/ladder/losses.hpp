#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ladder {

// A submission is a list of labels, one per test example. Binary labels on
// the attack path; probabilistic predictions for the clipped log loss.
using LabelVector = std::vector<double>;

// Per-example losses in [0,1] over a scoring subset.
using LossVector = Eigen::VectorXd;

enum class LossKind { ZeroOne, ClippedLog };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

// Clipping constant for the log loss; the normalized range is exactly [0,1].
inline constexpr double kLogLossClip = 1e-15;

inline double zero_one_loss(double predicted, double actual) {
  return predicted != actual ? 1.0 : 0.0;
}

// Binary cross-entropy, clipped to [p_min, 1-p_min] and divided by
// -ln(p_min) so the worst case saturates at exactly 1.
double clipped_log_loss(double predicted_prob, double actual);

double point_loss(LossKind kind, double predicted, double actual);

// Per-example losses of `submission` against `truth` over `subset`.
LossVector loss_vector(LossKind kind, std::span<const double> submission,
                       std::span<const double> truth,
                       std::span<const int> subset);

// Mean loss over the subset. Empty subsets are an input error.
double empirical_loss(LossKind kind, std::span<const double> submission,
                      std::span<const double> truth,
                      std::span<const int> subset);

struct GridValue {
  double value = 0.0;
  double step = 0.0;
};

// Nearest integer multiple of `step`; exact halves round away from zero.
GridValue round_to_grid(double x, double step);

// Scalar shorthand used throughout the mechanisms.
double grid_round(double x, double step);

bool on_grid(double x, double step, double tol_ulps = 4.0);

}  // namespace ladder
