#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "steering/bounds.hpp"

namespace steering {

// Photon-counting experiment model. Alice's axes are labeled so that matched
// ideal settings correlate positively (the singlet anticorrelation is folded
// into the labeling): the trial law is P(a0,b0) = (1 + a0 b0 mu u_k.v_j)/4
// over pre-detection outcomes, after which each party's detector for the
// drawn outcome fires with its efficiency, and every detector additionally
// fires with dark_prob. Double clicks: Alice records 0, Bob records a fair
// coin. Undetected outcomes: Alice 0, Bob null.
struct ExperimentConfig {
  double mu = 1.0;
  std::vector<BlochVector> alice_axes;
  MeasurementSet bob = octahedral_set();
  std::vector<std::array<double, 2>> alice_eff;  // [k][{+,-}]
  std::vector<std::array<double, 2>> bob_eff;    // [j][{+,-}]
  long long trials_per_pair = 0;
  double dark_prob = 0.0;
  std::uint64_t seed = 0;
};

// Uniform config: ideal octahedral axes on both sides, flat efficiencies.
ExperimentConfig uniform_config(double mu, double alice_eff, double bob_eff,
                                long long trials_per_pair, std::uint64_t seed);

// Validates axis counts, efficiency ranges, mu in [0,1]; throws
// InvalidArgument on violations.
void validate(const ExperimentConfig& config);

// Outcome categories. Alice: +1, 0, -1 (0 = undetected or double click).
// Bob: +1, -1, null (undetected). Indices: a in {0:+1, 1:0, 2:-1},
// b in {0:+1, 1:-1, 2:null}.
inline constexpr int kAliceOutcomes = 3;
inline constexpr int kBobOutcomes = 3;

// Joint per-trial law for setting pair (k, j), zero based, detector
// efficiencies applied but no dark counts (the simulator injects those).
// The nine entries sum to 1.
std::array<std::array<double, kBobOutcomes>, kAliceOutcomes>
joint_outcome_distribution(const ExperimentConfig& config, int k, int j);

// Trial tallies N_{ab|kj} for every setting pair, Bob-null outcomes
// included so each pair's total equals trials_per_pair; post-selection
// happens in the estimator, not here.
class TrialCounts {
 public:
  TrialCounts(int n, long long trials_per_pair);

  int n() const { return n_; }
  long long trials_per_pair() const { return trials_per_pair_; }

  long long& at(int k, int j, int a_idx, int b_idx);
  long long at(int k, int j, int a_idx, int b_idx) const;
  long long pair_total(int k, int j) const;

 private:
  int n_;
  long long trials_per_pair_;
  std::vector<long long> counts_;
};

// Sample every setting pair (equal trial allocation over the 3x3 grid).
// Each pair uses an independent stream derived from the seed, so the result
// does not depend on evaluation order. Deterministic: same config, same
// counts.
TrialCounts simulate(const ExperimentConfig& config);

struct SettingEstimates {
  double e_corr = 0.0;   // correlation estimator E~^c_j
  double e_alice = 0.0;  // detection estimator E~^a_j
};

struct ResidualReport {
  std::vector<SettingEstimates> per_setting;
  double s_value = 0.0;     // S~_n(r)
  double eta_alice = 0.0;   // mean of E~^a_j
  double r = 0.0;
  double bound = 0.0;       // supplied h
  double residual = 0.0;    // s_value - bound
  double stderr_ = 0.0;     // first-order Poisson propagation on S~
};

// Estimator on matched settings (k = j) with Bob-detection post-selection.
// Counts at b = +1 are divided by the per-setting efficiency ratio (the
// overall scale cancels); a = 0 rows enter the denominators only. A setting
// with no Bob-detected trials throws InsufficientData.
ResidualReport estimate(const TrialCounts& counts,
                        std::span<const double> bob_ratios, double r,
                        double bound);

// Bootstrap cross-check of the S~ standard error (Poisson-resampled counts).
double estimate_bootstrap_stderr(const TrialCounts& counts,
                                 std::span<const double> bob_ratios, double r,
                                 int resamples, std::uint64_t seed);

struct SpacetimeBound {
  double distance_m = 0.0;
  double time_s = 0.0;
  double speed = 0.0;       // straight-line distance over elapsed time
  double speed_over_c = 0.0;
};

inline constexpr double kSpeedOfLight = 299792458.0;

// Lower bound on the speed any signal would need: straight-line distance
// over elapsed time. Requires positive time and non-negative distance.
SpacetimeBound ftl_speed(double distance_m, double time_s);

// Counts CSV: header "k,j,a,b,N"; a in {1,0,-1}, b in {1,-1,0} with 0 = no
// detection at Bob. Settings are 1-based in the file.
TrialCounts read_counts_csv(std::istream& in);
void write_counts_csv(std::ostream& out, const TrialCounts& counts);

}  // namespace steering
