#include "steering/conservative.hpp"

#include <array>
#include <cmath>
#include <tuple>

namespace steering {

namespace {

void require_triad(const MeasurementSet& meas, double k_sigma) {
  if (meas.n() != 3)
    throw InvalidArgument("worst-case construction is defined for 3 settings");
  if (!(k_sigma >= 0.0) || !std::isfinite(k_sigma))
    throw InvalidArgument("k_sigma must be finite and >= 0");
}

int flip_count(const std::vector<int>& signs) {
  int flips = 0;
  for (int s : signs)
    if (s < 0) ++flips;
  return flips;
}

}  // namespace

ConservativeResult worst_case_no_message(const MeasurementSet& meas,
                                         double k_sigma) {
  require_triad(meas, k_sigma);

  // Pick the sign combination whose members huddle most tightly around
  // their mean: maximize the minimum member-mean inner product, breaking
  // ties by the inner-product sum, then by fewer flips (s and -s tie on
  // both inner-product keys, so the flip count decides between mirrors).
  bool have_best = false;
  std::tuple<double, double, int> best_key;
  std::vector<int> best_signs;
  std::array<BlochVector, 3> best_members{};
  BlochVector best_mean{};
  for (int bits = 0; bits < 8; ++bits) {
    std::vector<int> signs = {(bits & 4) ? -1 : 1, (bits & 2) ? -1 : 1,
                              (bits & 1) ? -1 : 1};
    std::array<BlochVector, 3> members{};
    BlochVector sum{};
    for (int j = 0; j < 3; ++j) {
      members[j] = signs[j] * meas.axis(j);
      sum = sum + members[j];
    }
    if (norm(sum) < 1e-12) continue;
    BlochVector mean = normalized(sum);
    double min_inner = 2.0;
    double sum_inner = 0.0;
    for (const BlochVector& member : members) {
      double inner = dot(member, mean);
      min_inner = std::min(min_inner, inner);
      sum_inner += inner;
    }
    std::tuple<double, double, int> key{min_inner, sum_inner,
                                        -flip_count(signs)};
    if (!have_best || key > best_key) {
      have_best = true;
      best_key = key;
      best_signs = signs;
      best_members = members;
      best_mean = mean;
    }
  }
  if (!have_best)
    throw DegenerateGeometry(
        "every sign combination of the axes sums to zero");

  std::vector<BlochVector> rotated(3);
  for (int j = 0; j < 3; ++j)
    rotated[j] =
        rotate_toward(best_members[j], best_mean, k_sigma * meas.sigma(j));

  return ConservativeResult{MeasurementSet(std::move(rotated), meas.sigmas()),
                            ComboChoice{best_signs, std::nullopt}, k_sigma};
}

ConservativeResult worst_case_one_bit(const MeasurementSet& meas,
                                      double k_sigma) {
  require_triad(meas, k_sigma);

  // Closest signed pair among the 12 (u < v, independent signs): maximize
  // the inner product, breaking ties by fewer flips, then enumeration order.
  constexpr std::array<std::pair<int, int>, 3> kPairs{
      {{0, 1}, {0, 2}, {1, 2}}};
  constexpr std::array<std::pair<int, int>, 4> kSigns{
      {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  bool have_best = false;
  std::pair<double, int> best_key;
  std::pair<int, int> best_pair{0, 1};
  std::pair<int, int> best_pair_signs{1, 1};
  for (const auto& [u, v] : kPairs) {
    for (const auto& [su, sv] : kSigns) {
      double inner = dot(su * meas.axis(u), sv * meas.axis(v));
      int flips = (su < 0 ? 1 : 0) + (sv < 0 ? 1 : 0);
      std::pair<double, int> key{inner, -flips};
      if (!have_best || key > best_key) {
        have_best = true;
        best_key = key;
        best_pair = {u, v};
        best_pair_signs = {su, sv};
      }
    }
  }

  auto [u, v] = best_pair;
  auto [su, sv] = best_pair_signs;
  BlochVector a = su * meas.axis(u);
  BlochVector b = sv * meas.axis(v);
  BlochVector sum = a + b;
  if (norm(sum) < 1e-12)
    throw DegenerateGeometry("closest signed pair is antiparallel");
  BlochVector mean = normalized(sum);

  std::vector<BlochVector> rotated(meas.axes());
  rotated[u] = rotate_toward(a, mean, k_sigma * meas.sigma(u));
  rotated[v] = rotate_toward(b, mean, k_sigma * meas.sigma(v));

  std::vector<int> signs = {1, 1, 1};
  signs[u] = su;
  signs[v] = sv;
  return ConservativeResult{MeasurementSet(std::move(rotated), meas.sigmas()),
                            ComboChoice{signs, best_pair}, k_sigma};
}

}  // namespace steering
