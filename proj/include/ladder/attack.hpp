#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ladder/losses.hpp"
#include "ladder/rng.hpp"

namespace ladder {

// The attacker's only view of the competition: submit labels, observe the
// reported loss. No split information crosses this interface.
class LossOracle {
 public:
  virtual ~LossOracle() = default;
  virtual double score(const LabelVector& labels) = 0;
};

struct AttackConfig {
  enum class Variant {
    ThresholdHalf,        // keep submissions with reported loss <= 1/2
    ImprovementSelected,  // keep submissions that lowered the incumbent best
  };

  long k = 0;        // submission budget
  long n_total = 0;  // full label count; the attacker never sees the split
  std::uint64_t seed = 0;
  Variant variant = Variant::ThresholdHalf;
  // Chance level the threshold variant selects against. Scores are only
  // observable on the mechanism's published grid, so callers set this to
  // 1/2 rounded to that grid (exactly 1/2 whenever 1/2 is on the grid).
  double chance_level = 0.5;
  bool keep_vectors = false;  // retain all drawn vectors in the report
};

struct AttackReport {
  LabelVector final_vector;
  long selected_count = 0;
  std::vector<double> reported_losses;
  std::vector<char> selected;         // per-submission selection flags
  std::vector<LabelVector> vectors;   // only when keep_vectors was set
  // Filled by the harness, which knows the truth; NaN until then.
  double public_true_loss = std::numeric_limits<double>::quiet_NaN();
  double heldout_true_loss = std::numeric_limits<double>::quiet_NaN();
};

// Coordinate-wise majority of binary label vectors; exact ties are resolved
// by the supplied RNG so heldout coordinates stay unbiased.
LabelVector majority(const std::vector<LabelVector>& vectors, Rng& tie_rng);

// The boosting attack: k uniform binary submissions, select per the variant,
// output their coordinate-wise majority (u_1 if nothing was selected).
AttackReport boosting_attack(LossOracle& oracle, const AttackConfig& config);

// Seeded generation of the t-th attack vector; shared with the experiment
// harness so per-step traces see exactly the vectors the attack submits.
LabelVector attack_vector(std::uint64_t seed, long t, long n_total);
Rng attack_tie_rng(std::uint64_t seed);

}  // namespace ladder
