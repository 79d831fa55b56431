#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "steering/bounds.hpp"

namespace steering {

// Which sign/pair combination the worst-case construction chose. `signs`
// holds the per-setting sign applied before rotation (+1 everywhere for
// settings left untouched); `pair` is set in the one-bit mode.
struct ComboChoice {
  std::vector<int> signs;
  std::optional<std::pair<int, int>> pair;  // zero-based setting indices
};

struct ConservativeResult {
  MeasurementSet rotated;
  ComboChoice combo;
  double k_sigma = 0.0;
};

// Worst case without communication: over the 2^3 sign combinations {s_j b_j},
// pick the one maximizing the minimum member-mean inner product (tie-breaks:
// larger inner-product sum, then fewer sign flips), then rotate every signed
// axis toward the combination mean by k_sigma * sigma_j (clamped at the
// mean). Sign flips are free for the bound, so flipped members stay flipped
// in the output. Requires n == 3; a vanishing mean or an antiparallel member
// throws DegenerateGeometry.
ConservativeResult worst_case_no_message(const MeasurementSet& meas,
                                         double k_sigma);

// Worst case with one bit: over the 12 signed pairs {±b_u, ±b_v}, pick the
// closest by inner product (tie-breaks: fewer flips, then enumeration order),
// rotate both members toward the pair mean by k_sigma * sigma_j, and leave
// the third axis untouched. Requires n == 3; an antiparallel closest pair
// throws DegenerateGeometry.
ConservativeResult worst_case_one_bit(const MeasurementSet& meas,
                                      double k_sigma);

}  // namespace steering
