#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "steering/errors.hpp"

namespace steering {

// Detection-rate table for one acquisition window. Outcome index 0 is +1,
// index 1 is -1. C holds coincidence rates per setting pair and outcome
// pair, A and B the singles rates at Alice and Bob per setting and outcome.
// duration_s converts rates back to counts for Poisson error propagation.
class RateTable {
 public:
  RateTable(int n, double duration_s = 1.0);

  int n() const { return n_; }
  double duration_s() const { return duration_s_; }

  double& c(int k, int j, int a, int b);
  double c(int k, int j, int a, int b) const;
  double& alice(int k, int a);
  double alice(int k, int a) const;
  double& bob(int j, int b);
  double bob(int j, int b) const;

  std::optional<double> pair_rate;  // raw pair production rate, if known

 private:
  int n_;
  double duration_s_;
  std::vector<double> c_, a_, b_;
};

// Expected rates from known efficiencies and joint outcome probabilities:
//   C_{kj}^{ab} = N alpha_k^a beta_j^b p_{kj}^{ab}
//   A_k^a      = N alpha_k^a sum_b p^{ab},  B_j^b = N beta_j^b sum_a p^{ab}.
// probs[k][j] = {p++, p+-, p-+, p--}, each block summing to 1. Marginals
// must not depend on the partner's setting (the singles tables are otherwise
// ill-defined); violations beyond 1e-9 throw InvalidArgument.
RateTable forward_rates(std::span<const std::array<double, 2>> alice_eff,
                        std::span<const std::array<double, 2>> bob_eff,
                        std::span<const std::array<double, 4>> probs,
                        double pair_rate);

// Klyshko-style inversions on a rate table at setting pair (k, j) (zero
// based). Exact on forward_rates output. Near-vanishing denominators throw
// IllConditioned with the condition estimate.
std::array<double, 2> bob_efficiencies(const RateTable& rates, int k, int j);
std::array<double, 2> alice_efficiencies(const RateTable& rates, int k, int j);

// Efficiency ratio beta_j^+ / beta_j^- for matched setting j, computed from
// coincidences and Alice's singles only -- Bob's own singles never enter.
double bob_ratio(const RateTable& rates, int j);

struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct EfficiencyEstimate {
  std::array<ValueWithError, 2> alice;  // alpha_k^{+,-}
  std::array<ValueWithError, 2> bob;    // beta_j^{+,-}
  ValueWithError ratio;                 // beta_j^+ / beta_j^-
};

// Point estimates plus first-order Poisson error propagation (each rate is
// an independent Poisson count over duration_s).
EfficiencyEstimate estimate_efficiencies(const RateTable& rates, int k, int j);

// Bootstrap cross-check of the ratio standard error: Poisson-resample the
// counts `resamples` times and take the sample deviation of the ratio.
double bob_ratio_bootstrap_stderr(const RateTable& rates, int j, int resamples,
                                  std::uint64_t seed);

// Non-overlapping two-sample (Allan) deviation of a series averaged over
// windows of `window` samples. Requires window >= 1 and at least two full
// windows.
double allan_deviation(std::span<const double> series, int window);

struct BiasOptions {
  double mu = 0.98;               // Werner purity of the simulated source
  double alice_eff = 0.75;        // both Alice outcomes
  double bob_eff_plus = 0.90;
  double bob_eff_minus = 0.77;
};

struct BiasReport {
  double true_ratio = 0.0;
  std::array<double, 3> estimated{};  // per matched basis z, x, y
  std::array<double, 3> bias{};       // estimated - true
};

// Systematic-error study for the ratio estimator. Builds analytic expected
// rates including uniform background clicks (probability background_rate /
// trial_rate per detector per trial), double-pair emission in the
// independent-pairs approximation (P(2 pairs) = pair_prob^2), and
// polarization-dependent loss modeled per arm as a Kraus attenuation of the
// horizontal component (each party's singles see only their own arm's
// loss), then compares bob_ratio against the configured truth in the three
// matched octahedral bases.
BiasReport bias_study(double background_rate, double pair_prob,
                      double trial_rate, double pdl_fraction,
                      const BiasOptions& options = {});

// Rate CSV: header "t,type,k,j,a,b,rate". type C rows carry k,j,a,b; type A
// rows carry k,a; type B rows carry j,b; type N rows carry the raw pair
// rate. Unused fields are 0. t indexes acquisition windows from 0.
std::vector<RateTable> load_rates_csv(std::istream& in, double duration_s = 1.0);
void write_rates_csv(std::ostream& out, std::span<const RateTable> windows);

}  // namespace steering
