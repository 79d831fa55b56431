#pragma once

#include <optional>
#include <span>
#include <vector>

#include "steering/bloch.hpp"

namespace steering {

// Bob's measurement settings: unit Bloch axes plus their one-sigma angular
// uncertainties (radians). Axes within 1e-3 of unit norm are normalized on
// construction (published axes are rounded); worse than that is rejected.
class MeasurementSet {
 public:
  MeasurementSet(std::vector<BlochVector> axes, std::vector<double> sigmas);
  explicit MeasurementSet(std::vector<BlochVector> axes);

  int n() const { return static_cast<int>(axes_.size()); }
  const std::vector<BlochVector>& axes() const { return axes_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  const BlochVector& axis(int j) const { return axes_.at(j); }
  double sigma(int j) const { return sigmas_.at(j); }

 private:
  std::vector<BlochVector> axes_;
  std::vector<double> sigmas_;  // same length as axes_, entries >= 0
};

// Ideal mutually unbiased triad: z, x, y (settings 1, 2, 3).
MeasurementSet octahedral_set();

// |axis_i . axis_j| <= tol for all i != j.
bool mutually_unbiased(const MeasurementSet& meas, double tol = 0.1);

// One deterministic cheating strategy: alpha maps each setting to a declared
// outcome in {+1, 0, -1}; ell maps each setting to a message in 1..d.
struct CheatStrategy {
  std::vector<int> alpha;
  std::vector<int> ell;
  int d = 1;

  int m() const;  // number of settings with alpha != 0
};

// One optimal responding state per message; a group whose weighted axis sum
// vanishes (or that receives no settings) has no preferred direction and is
// recorded as nullopt.
struct ResponseEnsemble {
  std::vector<std::optional<BlochVector>> states;
};

struct BoundResult {
  double h = 0.0;
  double r = 0.0;
  CheatStrategy strategy;
  ResponseEnsemble ensemble;
};

// Value of one strategy at penalty r:
//   (1/n) [ -r m + sum_l | sum_{j: ell(j)=l} alpha(j) b_j | ],
// the responder maximizing each message group independently. If `ensemble`
// is non-null it receives the maximizing states.
double strategy_value(const CheatStrategy& strategy, const MeasurementSet& meas,
                      double r, ResponseEnsemble* ensemble = nullptr);

// Exhaustive maximum over all 3^n d^n deterministic strategies. Ties return
// the lexicographically smallest strategy (alpha entries ordered -1 < 0 < +1,
// then ell). Requires 1 <= d <= n-1 and 0 <= r <= 1. The search is sharded
// over `threads` workers (0 = STEERKIT_THREADS) with an order-independent
// reduction, so the result does not depend on the shard count.
BoundResult steering_bound(const MeasurementSet& meas, int d, double r,
                           int threads = 0);

struct GainResult {
  double r = 0.0;       // penalty minimizing mu(r) = h(r)/eta + r
  double h = 0.0;       // bound at that penalty
  double mu_min = 0.0;  // may exceed 1: no Werner state violates at this eta
};

// Exact minimization of mu(r) = h(r)/eta + r over r in [0,1]. h(r) is the
// upper envelope of the strategy lines c_s - r m_s/n, so the minimum lies at
// a pairwise line intersection or an endpoint; the smallest minimizing r is
// returned on ties.
GainResult optimal_gain(const MeasurementSet& meas, int d, double eta,
                        int threads = 0);

struct CurvePoint {
  double eta = 0.0;
  double r = 0.0;
  double h = 0.0;
  double mu_min = 0.0;
};

// optimal_gain over an efficiency grid; mu_min is non-increasing in eta.
std::vector<CurvePoint> min_purity_curve(const MeasurementSet& meas, int d,
                                         std::span<const double> etas,
                                         int threads = 0);

// Quantum ceiling 1 - h(r=0) for comparison against the classical bound.
// Meaningful for mutually unbiased settings; warns on stderr otherwise.
double tsirelson(const MeasurementSet& meas, int d);

}  // namespace steering
