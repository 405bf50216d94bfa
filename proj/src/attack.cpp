#include "ladder/attack.hpp"

#include <stdexcept>

namespace ladder {

LabelVector majority(const std::vector<LabelVector>& vectors, Rng& tie_rng) {
  if (vectors.empty())
    throw std::invalid_argument("majority of an empty set");
  const std::size_t n = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != n)
      throw std::invalid_argument("majority requires equal lengths");
  LabelVector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long ones = 0;
    for (const auto& v : vectors) ones += v[i] == 1.0 ? 1 : 0;
    const long m = static_cast<long>(vectors.size());
    if (2 * ones > m)
      out[i] = 1.0;
    else if (2 * ones < m)
      out[i] = 0.0;
    else
      out[i] = static_cast<double>(tie_rng.bit());
  }
  return out;
}

LabelVector attack_vector(std::uint64_t seed, long t, long n_total) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
  LabelVector u(static_cast<std::size_t>(n_total));
  for (auto& x : u) x = static_cast<double>(rng.bit());
  return u;
}

Rng attack_tie_rng(std::uint64_t seed) {
  return Rng(derive_seed(seed, 0x7137B4EAull));
}

AttackReport boosting_attack(LossOracle& oracle, const AttackConfig& config) {
  if (config.k < 1 || config.n_total < 1)
    throw std::invalid_argument("attack needs k >= 1 and n_total >= 1");

  AttackReport report;
  report.reported_losses.reserve(static_cast<std::size_t>(config.k));
  report.selected.reserve(static_cast<std::size_t>(config.k));

  std::vector<LabelVector> selected_vectors;
  LabelVector first;
  double incumbent = std::numeric_limits<double>::infinity();
  for (long t = 1; t <= config.k; ++t) {
    LabelVector u = attack_vector(config.seed, t, config.n_total);
    const double l = oracle.score(u);
    report.reported_losses.push_back(l);

    bool take = false;
    if (config.variant == AttackConfig::Variant::ThresholdHalf) {
      take = l <= config.chance_level;
    } else {
      take = l < incumbent;
      if (take) incumbent = l;
    }
    report.selected.push_back(take ? 1 : 0);
    if (take) selected_vectors.push_back(u);
    if (t == 1) first = u;
    if (config.keep_vectors) report.vectors.push_back(std::move(u));
  }

  report.selected_count = static_cast<long>(selected_vectors.size());
  if (selected_vectors.empty()) {
    report.final_vector = std::move(first);  // I = empty: fall back to u_1
  } else {
    Rng tie_rng = attack_tie_rng(config.seed);
    report.final_vector = majority(selected_vectors, tie_rng);
  }
  return report;
}

}  // namespace ladder
