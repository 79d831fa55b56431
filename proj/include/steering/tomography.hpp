#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "steering/bloch.hpp"

namespace steering {

// One probe interval: a nominal input state sent at Bob, with coincidence
// and trial counts recorded for every measurement setting (index 0 = setting
// 1). Labels are the six cardinal states H, V, D, A, R, L.
struct ProbeRecord {
  char label = 'H';
  BlochVector input;                   // possibly perturbed from nominal
  std::vector<long long> counts;       // per setting, >= 0
  std::vector<long long> trials;       // per setting, > 0
};

// Exact Bloch vector for a cardinal state label. Throws InvalidArgument on
// anything but H, V, D, A, R, L.
BlochVector nominal_probe_state(char label);

// Preparation plate settings (degrees): a horizontal polarizer followed by
// HWP(hwp_deg) then QWP(qwp_deg) produces the labeled state exactly under
// the forward-propagation convention.
struct PrepPlates {
  double hwp_deg = 0.0;
  double qwp_deg = 0.0;
};
PrepPlates nominal_prep_plates(char label);

struct AxisFit {
  BlochVector axis;              // unit
  double scale = 0.0;            // per-trial rate constant, > 0
  double log_likelihood = 0.0;
};

// Maximum-likelihood measurement axis for one setting. Counts are Poisson
// with mean scale * trials_i * (1 + axis . s_i)/2; the scale is profiled out
// in closed form and the unit axis found by multi-start (8 corner
// directions) ascent, tolerance 1e-10 on the log-likelihood. Requires at
// least 4 probes whose inputs span the sphere; throws IllPosedFit otherwise.
AxisFit fit_measurement_axis(std::span<const ProbeRecord> probes, int setting);

struct ResampleOptions {
  double wave_tolerance = 0.005;   // retardance error, wavelengths, uniform +-
  double angle_sigma_deg = 0.1;    // zero-angle error, normal sigma
};

// Parametric resample of a probe set: draw one retardance and one zero-angle
// error per physical preparation plate (HWP and QWP, 4 draws total, shared
// by all probes), recompute every input state by propagating the polarizer
// output H through the perturbed plates at the label's nominal angles, and
// redraw every count Poisson about its recorded value. With zero tolerances
// the inputs reproduce the nominal states bit-for-bit.
std::vector<ProbeRecord> parametric_resample(std::span<const ProbeRecord> probes,
                                             const ResampleOptions& options,
                                             std::mt19937_64& rng);

struct TomographyEstimate {
  BlochVector axis;    // mean fitted axis, unit
  double sigma = 0.0;  // radians: spread along the semi-major axis of the
                       // tangent-plane covariance ellipse
  int samples = 0;     // successful bootstrap trials
};

struct BootstrapOptions {
  ResampleOptions resample;
  int trials = 10000;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = STEERKIT_THREADS
};

// Bootstrapped tomography for one setting: each trial resamples the probes
// with replacement, applies parametric_resample, and refits the axis.
// Per-trial seeds derive from the master seed, so results are independent of
// sharding. Individual fit failures are skipped; more than 1% of them throws
// IllPosedFit.
TomographyEstimate bootstrap_tomography(std::span<const ProbeRecord> probes,
                                        int setting,
                                        const BootstrapOptions& options);

// Probe CSV: header "label,setting,counts,trials"; rows grouped per probe
// with settings ascending 1..n. Input vectors are the nominal label states.
std::vector<ProbeRecord> load_probes_csv(std::istream& in);
void write_probes_csv(std::ostream& out, std::span<const ProbeRecord> probes);

}  // namespace steering
