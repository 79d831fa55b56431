#pragma once

#include <optional>
#include <span>
#include <vector>

#include "steering/errors.hpp"

namespace steering {

// Bloch-sphere conventions used throughout:
//   |V> = (0,0,1)   |H> = (0,0,-1)
//   |D> = (1,0,0)   |A> = (-1,0,0)
//   |L> = (0,1,0)   |R> = (0,-1,0)
// The linear-polarization plane is y = 0. A linear polarization at physical
// angle t from horizontal sits at (sin 2t, 0, -cos 2t); a waveplate whose
// fast axis is at physical angle t rotates the sphere about that vector by
// its retardance. Forward propagation follows the right-hand rule, backward
// propagation the left-hand rule. Angles at interfaces are degrees; the
// rotation primitives below take radians.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline BlochVector operator+(const BlochVector& a, const BlochVector& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline BlochVector operator-(const BlochVector& a, const BlochVector& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline BlochVector operator-(const BlochVector& a) { return {-a.x, -a.y, -a.z}; }
inline BlochVector operator*(double s, const BlochVector& a) {
  return {s * a.x, s * a.y, s * a.z};
}
inline BlochVector operator*(const BlochVector& a, double s) { return s * a; }

double dot(const BlochVector& a, const BlochVector& b);
BlochVector cross(const BlochVector& a, const BlochVector& b);
double norm(const BlochVector& a);

// Throws DegenerateGeometry on a (near-)zero vector.
BlochVector normalized(const BlochVector& a);

// Angle in [0, pi], radians. Inputs need not be normalized.
double angle_between(const BlochVector& a, const BlochVector& b);

// Unit-norm tolerance for measurement axes.
inline constexpr double kAxisNormTolerance = 1e-9;

// Rotate v by `angle` radians about `axis` (right-hand rule). The axis must
// be unit within kAxisNormTolerance; throws InvalidArgument otherwise.
// Preserves |v| to machine precision.
BlochVector rodrigues_rotate(const BlochVector& v, const BlochVector& axis,
                             double angle);

// Rotate v toward target in their common plane by min(angle, separation),
// never overshooting. v == target returns v unchanged for any angle.
// Antiparallel inputs have no common plane: throws DegenerateGeometry.
BlochVector rotate_toward(const BlochVector& v, const BlochVector& target,
                          double angle);

struct EigenSum {
  double value = 0.0;                     // lambda_max = |sum_j c_j b_j|
  std::optional<BlochVector> direction;   // maximizing pure state; absent if
                                          // the sum vanishes (value ~ 0)
};

// Largest eigenvalue of sum_j c_j (b_j . sigma) over pure qubit states,
// together with the attaining Bloch direction. For traceless qubit
// observables this is just the norm of the weighted axis sum.
EigenSum max_eigen_sum(std::span<const BlochVector> axes,
                       std::span<const double> coeffs);

enum class StageKind { half_wave, quarter_wave, pockels };
enum class Direction { forward, backward };

struct OpticalStage {
  StageKind kind = StageKind::half_wave;
  double angle_deg = 0.0;  // waveplates: fast-axis physical angle
  double theta_deg = 0.0;  // pockels: drive-phase magnitude
};

// Stages are stored in the order light traverses them for `direction`.
// reversed() yields the same physical arrangement traversed the other way.
struct OpticalPipeline {
  std::vector<OpticalStage> stages;
  Direction direction = Direction::forward;

  OpticalPipeline reversed() const;
};

// Single retarder: rotation about the fast-axis Bloch vector by the
// retardance, with the sense of `dir`.
BlochVector retarder(const BlochVector& state, double fast_axis_deg,
                     double retardance_deg, Direction dir);

// Measurement-basis pipeline (backward traversal order): HWP, QWP, Pockels
// cell, QWP, HWP. The plate angles are the exact solutions of the alignment
// condition -- the QWP+HWP pair maps the symmetric axis (1,1,1)/sqrt(3) onto
// the Pockels-cell axis (1,0,0) -- so that backward propagation from |V>
// yields exactly |V>, |D>, |L> for settings 1, 2, 3. They agree with the
// hardware settings -24.94 / -27.37 / 62.63 degrees to within 0.01 degrees.
OpticalPipeline reference_pipeline(double theta_deg = 120.0);
double reference_hwp_deg();
double reference_qwp1_deg();
double reference_qwp2_deg();

// Apply the pipeline to a state. `setting` (1..3) selects the Pockels phase
// multiplier (0, +1, -1); pipelines without a Pockels stage accept any
// setting. Throws InvalidArgument for settings outside 1..3.
BlochVector propagate(const OpticalPipeline& pipeline, const BlochVector& state,
                      int setting);

}  // namespace steering
