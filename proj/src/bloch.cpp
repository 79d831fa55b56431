#include "steering/bloch.hpp"

#include <algorithm>
#include <cmath>

namespace steering {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double d) { return d * kPi / 180.0; }

// Fast-axis Bloch vector of a waveplate at physical angle t (degrees) from
// horizontal: a linear polarization axis lies in the y = 0 plane.
BlochVector waveplate_axis(double t_deg) {
  double t = deg2rad(t_deg);
  return {std::sin(2.0 * t), 0.0, -std::cos(2.0 * t)};
}

}  // namespace

double dot(const BlochVector& a, const BlochVector& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

BlochVector cross(const BlochVector& a, const BlochVector& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const BlochVector& a) { return std::sqrt(dot(a, a)); }

BlochVector normalized(const BlochVector& a) {
  double n = norm(a);
  if (n < 1e-12)
    throw DegenerateGeometry("cannot normalize a (near-)zero vector");
  return (1.0 / n) * a;
}

double angle_between(const BlochVector& a, const BlochVector& b) {
  BlochVector u = normalized(a);
  BlochVector v = normalized(b);
  double c = std::clamp(dot(u, v), -1.0, 1.0);
  // atan2 form is accurate near 0 and pi where acos loses digits.
  return std::atan2(norm(cross(u, v)), c);
}

BlochVector rodrigues_rotate(const BlochVector& v, const BlochVector& axis,
                             double angle) {
  if (std::abs(norm(axis) - 1.0) > kAxisNormTolerance)
    throw InvalidArgument("rotation axis must be unit length");
  double c = std::cos(angle);
  double s = std::sin(angle);
  BlochVector kxv = cross(axis, v);
  double kdv = dot(axis, v);
  return c * v + s * kxv + (kdv * (1.0 - c)) * axis;
}

BlochVector rotate_toward(const BlochVector& v, const BlochVector& target,
                          double angle) {
  double separation = angle_between(v, target);
  if (separation < 1e-12) return v;
  if (kPi - separation < 1e-9)
    throw DegenerateGeometry(
        "rotate_toward: antiparallel vectors have no unique rotation plane");
  BlochVector axis = normalized(cross(v, target));
  double step = std::min(std::max(angle, 0.0), separation);
  return rodrigues_rotate(v, axis, step);
}

EigenSum max_eigen_sum(std::span<const BlochVector> axes,
                       std::span<const double> coeffs) {
  if (axes.size() != coeffs.size())
    throw InvalidArgument("max_eigen_sum: axes/coeffs size mismatch");
  BlochVector sum{};
  for (std::size_t i = 0; i < axes.size(); ++i) sum = sum + coeffs[i] * axes[i];
  EigenSum out;
  out.value = norm(sum);
  if (out.value > 1e-12) out.direction = (1.0 / out.value) * sum;
  return out;
}

OpticalPipeline OpticalPipeline::reversed() const {
  OpticalPipeline r;
  r.stages.assign(stages.rbegin(), stages.rend());
  r.direction =
      direction == Direction::forward ? Direction::backward : Direction::forward;
  return r;
}

BlochVector retarder(const BlochVector& state, double fast_axis_deg,
                     double retardance_deg, Direction dir) {
  double sense = dir == Direction::forward ? 1.0 : -1.0;
  return rodrigues_rotate(state, waveplate_axis(fast_axis_deg),
                          sense * deg2rad(retardance_deg));
}

namespace {

// Alignment solution: the QWP+HWP pair carries the symmetric axis
// (1,1,1)/sqrt(3) onto the Pockels-cell axis (1,0,0), so the cell's drive
// phase rotates the sphere about the symmetric axis and cycles V -> D -> L.
// The quarter-wave angle satisfies cos(2q) = -1/sqrt(3); the half-wave angle
// follows from requiring the intermediate axis to land in the y = 0 plane.
double exact_qwp1_deg() {
  return -0.5 * std::acos(1.0 / std::sqrt(3.0)) * 180.0 / kPi;
}

double exact_hwp_deg() {
  double p_num = 0.5 + 1.0 / std::sqrt(3.0);
  double r_num = -0.5 - std::sqrt(6.0) / 6.0;
  double denom = -std::sqrt(p_num - r_num);  // p_num^2 + r_num^2 == p_num - r_num
  double sin2h = p_num / denom;
  double cos2h = r_num / denom;
  return 0.5 * std::atan2(sin2h, cos2h) * 180.0 / kPi;
}

}  // namespace

double reference_hwp_deg() { return exact_hwp_deg(); }
double reference_qwp1_deg() { return exact_qwp1_deg(); }
double reference_qwp2_deg() { return exact_qwp1_deg() + 90.0; }

OpticalPipeline reference_pipeline(double theta_deg) {
  OpticalPipeline p;
  p.direction = Direction::backward;
  p.stages = {
      {StageKind::half_wave, reference_hwp_deg(), 0.0},
      {StageKind::quarter_wave, reference_qwp1_deg(), 0.0},
      {StageKind::pockels, 0.0, theta_deg},
      {StageKind::quarter_wave, reference_qwp2_deg(), 0.0},
      {StageKind::half_wave, reference_hwp_deg(), 0.0},
  };
  return p;
}

BlochVector propagate(const OpticalPipeline& pipeline, const BlochVector& state,
                      int setting) {
  if (setting < 1 || setting > 3)
    throw InvalidArgument("setting must be 1, 2, or 3");
  double multiplier = setting == 1 ? 0.0 : (setting == 2 ? 1.0 : -1.0);
  BlochVector s = state;
  for (const OpticalStage& stage : pipeline.stages) {
    switch (stage.kind) {
      case StageKind::half_wave:
        s = retarder(s, stage.angle_deg, 180.0, pipeline.direction);
        break;
      case StageKind::quarter_wave:
        s = retarder(s, stage.angle_deg, 90.0, pipeline.direction);
        break;
      case StageKind::pockels: {
        // The cell's axis sits at 45 degrees: Bloch axis (1,0,0). Its drive
        // phase adds with the backward sense, so the backward picture
        // rotates by +theta and the forward picture by -theta.
        double sense = pipeline.direction == Direction::backward ? 1.0 : -1.0;
        s = rodrigues_rotate(s, BlochVector{1.0, 0.0, 0.0},
                             sense * deg2rad(stage.theta_deg) * multiplier);
        break;
      }
    }
  }
  return s;
}

}  // namespace steering
