#include "steering/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "steering/io.hpp"
#include "steering/random.hpp"

namespace steering {

namespace {

constexpr char kLabels[] = {'H', 'V', 'D', 'A', 'R', 'L'};

int label_index(char label) {
  for (int i = 0; i < 6; ++i)
    if (kLabels[i] == label) return i;
  throw InvalidArgument(std::string("unknown probe label '") + label +
                        "'; expected one of H, V, D, A, R, L");
}

int setting_index(std::span<const ProbeRecord> probes, int setting) {
  if (probes.empty()) throw InvalidArgument("no probe records");
  std::size_t per_probe = probes.front().counts.size();
  for (const ProbeRecord& p : probes) {
    if (p.counts.size() != per_probe || p.trials.size() != per_probe)
      throw InvalidArgument("probes disagree on the number of settings");
  }
  if (setting < 1 || static_cast<std::size_t>(setting) > per_probe)
    throw InvalidArgument("setting index out of range");
  return setting - 1;
}

// Log-likelihood with the rate constant profiled out. Counts are Poisson
// with mean scale * trials * q, q = (1 + axis . input)/2, so the optimal
// scale is (sum counts)/(sum trials * q) and the axis-dependent part of the
// likelihood is sum_i c_i ln q_i - C ln(sum_i t_i q_i).
struct Profile {
  double log_likelihood = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  BlochVector gradient{};  // unconstrained d/d(axis); project before use
};

Profile profiled_likelihood(std::span<const ProbeRecord> probes, int idx,
                            const BlochVector& axis) {
  Profile out;
  double total_counts = 0.0;
  double total_tq = 0.0;
  double log_terms = 0.0;
  BlochVector grad_log{};
  BlochVector grad_tq{};
  for (const ProbeRecord& p : probes) {
    double c = static_cast<double>(p.counts[idx]);
    double t = static_cast<double>(p.trials[idx]);
    double q = 0.5 * (1.0 + dot(axis, p.input));
    if (q < 0.0) q = 0.0;
    total_counts += c;
    total_tq += t * q;
    grad_tq = grad_tq + (0.5 * t) * p.input;
    if (c > 0.0) {
      if (q <= 0.0) return out;  // impossible outcome: -inf likelihood
      log_terms += c * std::log(q);
      grad_log = grad_log + (0.5 * c / q) * p.input;
    }
  }
  if (total_counts <= 0.0 || total_tq <= 0.0) return out;
  out.log_likelihood = log_terms - total_counts * std::log(total_tq);
  out.scale = total_counts / total_tq;
  out.gradient = grad_log - (total_counts / total_tq) * grad_tq;
  return out;
}

// Maximize the profiled likelihood over unit axes by projected gradient
// ascent with backtracking line search, from one starting direction.
struct LocalFit {
  BlochVector axis{0.0, 0.0, 1.0};
  Profile profile;
  bool converged = false;
};

LocalFit ascend(std::span<const ProbeRecord> probes, int idx,
                BlochVector axis) {
  constexpr int kMaxIterations = 2000;
  constexpr double kTolerance = 1e-10;
  LocalFit fit;
  fit.axis = axis;
  fit.profile = profiled_likelihood(probes, idx, axis);
  if (!std::isfinite(fit.profile.log_likelihood)) return fit;
  double step = 1.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    BlochVector g = fit.profile.gradient;
    BlochVector tangent = g - dot(g, fit.axis) * fit.axis;
    double gnorm = norm(tangent);
    if (gnorm < 1e-13) {
      fit.converged = true;
      break;
    }
    bool moved = false;
    for (int back = 0; back < 60; ++back) {
      BlochVector trial = fit.axis + (step / gnorm) * tangent;
      double len = norm(trial);
      if (len > 1e-12) {
        trial = (1.0 / len) * trial;
        Profile p = profiled_likelihood(probes, idx, trial);
        if (p.log_likelihood > fit.profile.log_likelihood) {
          double gain = p.log_likelihood - fit.profile.log_likelihood;
          fit.axis = trial;
          fit.profile = p;
          moved = true;
          step = std::min(step * 2.0, 1.0);
          if (gain < kTolerance) {
            fit.converged = true;
            return fit;
          }
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) {
      // No uphill step left at the smallest scale: numerically converged.
      fit.converged = true;
      break;
    }
  }
  return fit;
}

void check_design(std::span<const ProbeRecord> probes) {
  if (probes.size() < 4)
    throw IllPosedFit("need at least 4 probe states to identify an axis");
  // The inputs must span three dimensions affinely, otherwise axis and
  // scale are not jointly identifiable.
  BlochVector mean{};
  for (const ProbeRecord& p : probes) mean = mean + p.input;
  mean = (1.0 / static_cast<double>(probes.size())) * mean;
  double m[3][3] = {};
  for (const ProbeRecord& p : probes) {
    BlochVector d = p.input - mean;
    const double v[3] = {d.x, d.y, d.z};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] += v[r] * v[c];
  }
  double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double scale = m[0][0] + m[1][1] + m[2][2];
  if (!(det > 1e-9 * scale * scale * scale + 1e-300))
    throw IllPosedFit("probe states are (nearly) coplanar; axis not identifiable");
}

}  // namespace

BlochVector nominal_probe_state(char label) {
  switch (label) {
    case 'H': return {0.0, 0.0, -1.0};
    case 'V': return {0.0, 0.0, 1.0};
    case 'D': return {1.0, 0.0, 0.0};
    case 'A': return {-1.0, 0.0, 0.0};
    case 'R': return {0.0, -1.0, 0.0};
    case 'L': return {0.0, 1.0, 0.0};
    default:
      throw InvalidArgument(std::string("unknown probe label '") + label + "'");
  }
}

PrepPlates nominal_prep_plates(char label) {
  switch (label) {
    case 'H': return {0.0, 0.0};
    case 'V': return {45.0, 0.0};
    case 'D': return {22.5, 45.0};
    case 'A': return {-22.5, -45.0};
    case 'R': return {22.5, 0.0};
    case 'L': return {22.5, 90.0};
    default:
      throw InvalidArgument(std::string("unknown probe label '") + label + "'");
  }
}

AxisFit fit_measurement_axis(std::span<const ProbeRecord> probes, int setting) {
  int idx = setting_index(probes, setting);
  check_design(probes);
  for (const ProbeRecord& p : probes) {
    if (p.counts[idx] < 0) throw InvalidArgument("counts must be >= 0");
    if (p.trials[idx] <= 0) throw InvalidArgument("trials must be > 0");
  }

  // Corner directions keep every start a finite likelihood: a start sitting
  // exactly opposite a probe state with nonzero counts would score -inf.
  constexpr double kC = 0.5773502691896258;
  static constexpr BlochVector kStarts[] = {
      {kC, kC, kC},   {kC, kC, -kC},   {kC, -kC, kC},   {kC, -kC, -kC},
      {-kC, kC, kC},  {-kC, kC, -kC},  {-kC, -kC, kC},  {-kC, -kC, -kC}};
  LocalFit best;
  for (const BlochVector& start : kStarts) {
    LocalFit fit = ascend(probes, idx, start);
    if (fit.profile.log_likelihood > best.profile.log_likelihood) best = fit;
  }
  if (!std::isfinite(best.profile.log_likelihood) || best.profile.scale <= 0.0)
    throw IllPosedFit("likelihood has no finite maximum on these probes");
  return AxisFit{best.axis, best.profile.scale, best.profile.log_likelihood};
}

std::vector<ProbeRecord> parametric_resample(std::span<const ProbeRecord> probes,
                                             const ResampleOptions& options,
                                             std::mt19937_64& rng) {
  if (!(options.wave_tolerance >= 0.0) || !(options.angle_sigma_deg >= 0.0))
    throw InvalidArgument("resample tolerances must be >= 0");

  // One retardance and one zero-angle error per physical plate, shared by
  // every probe (the same two plates prepare all of them).
  auto draw_wave = [&]() {
    if (options.wave_tolerance == 0.0) return 0.0;
    return std::uniform_real_distribution<double>(-options.wave_tolerance,
                                                  options.wave_tolerance)(rng);
  };
  auto draw_angle = [&]() {
    if (options.angle_sigma_deg == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, options.angle_sigma_deg)(rng);
  };
  double hwp_wave = draw_wave();
  double hwp_zero = draw_angle();
  double qwp_wave = draw_wave();
  double qwp_zero = draw_angle();
  bool perturbed = hwp_wave != 0.0 || hwp_zero != 0.0 || qwp_wave != 0.0 ||
                   qwp_zero != 0.0;

  std::vector<ProbeRecord> out(probes.begin(), probes.end());
  for (ProbeRecord& p : out) {
    PrepPlates plates = nominal_prep_plates(p.label);
    if (perturbed) {
      BlochVector s = nominal_probe_state('H');
      s = retarder(s, plates.hwp_deg + hwp_zero, 180.0 + hwp_wave * 360.0,
                   Direction::forward);
      s = retarder(s, plates.qwp_deg + qwp_zero, 90.0 + qwp_wave * 360.0,
                   Direction::forward);
      p.input = s;
    } else {
      p.input = nominal_probe_state(p.label);
    }
    for (long long& c : p.counts) {
      if (c > 0)
        c = std::poisson_distribution<long long>(static_cast<double>(c))(rng);
    }
  }
  return out;
}

TomographyEstimate bootstrap_tomography(std::span<const ProbeRecord> probes,
                                        int setting,
                                        const BootstrapOptions& options) {
  setting_index(probes, setting);  // validates probes + setting early
  if (options.trials < 2)
    throw InvalidArgument("bootstrap needs at least 2 trials");

  int trials = options.trials;
  std::vector<BlochVector> axes(trials);
  std::vector<char> ok(trials, 0);

  auto run_block = [&](int begin, int end) {
    std::vector<ProbeRecord> drawn;
    for (int t = begin; t < end; ++t) {
      std::mt19937_64 rng = make_engine(derive_seed(options.seed, t));
      drawn.clear();
      std::uniform_int_distribution<std::size_t> pick(0, probes.size() - 1);
      for (std::size_t i = 0; i < probes.size(); ++i)
        drawn.push_back(probes[pick(rng)]);
      std::vector<ProbeRecord> resampled =
          parametric_resample(drawn, options.resample, rng);
      try {
        AxisFit fit = fit_measurement_axis(resampled, setting);
        axes[t] = fit.axis;
        ok[t] = 1;
      } catch (const Error&) {
        ok[t] = 0;
      }
    }
  };

  int workers = options.threads > 0 ? options.threads : default_thread_count();
  if (workers <= 1 || trials < 2 * workers) {
    run_block(0, trials);
  } else {
    std::vector<std::thread> pool;
    int chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int begin = std::min(trials, w * chunk);
      int end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(run_block, begin, end);
    }
    for (std::thread& t : pool) t.join();
  }

  int good = 0;
  BlochVector sum{};
  for (int t = 0; t < trials; ++t)
    if (ok[t]) {
      ++good;
      sum = sum + axes[t];
    }
  int failures = trials - good;
  if (failures * 100 > trials)
    throw IllPosedFit("more than 1% of bootstrap fits failed");
  if (norm(sum) < 1e-12)
    throw IllPosedFit("bootstrap axes have no mean direction");
  BlochVector mean = normalized(sum);

  // Spread: project each axis into the tangent plane at the mean via the
  // spherical log map and take the semi-major axis of the 2x2 covariance.
  BlochVector helper = std::abs(mean.z) < 0.9 ? BlochVector{0.0, 0.0, 1.0}
                                              : BlochVector{1.0, 0.0, 0.0};
  BlochVector e1 = normalized(cross(mean, helper));
  BlochVector e2 = cross(mean, e1);
  std::vector<std::array<double, 2>> coords;
  coords.reserve(good);
  for (int t = 0; t < trials; ++t) {
    if (!ok[t]) continue;
    double theta = angle_between(mean, axes[t]);
    BlochVector tangential = axes[t] - dot(axes[t], mean) * mean;
    double len = norm(tangential);
    if (len < 1e-15 || theta < 1e-15) {
      coords.push_back({0.0, 0.0});
    } else {
      double f = theta / len;
      coords.push_back({f * dot(tangential, e1), f * dot(tangential, e2)});
    }
  }
  double m1 = 0.0, m2 = 0.0;
  for (const auto& u : coords) {
    m1 += u[0];
    m2 += u[1];
  }
  m1 /= good;
  m2 /= good;
  double cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (const auto& u : coords) {
    cxx += (u[0] - m1) * (u[0] - m1);
    cyy += (u[1] - m2) * (u[1] - m2);
    cxy += (u[0] - m1) * (u[1] - m2);
  }
  double denom = good > 1 ? good - 1.0 : 1.0;
  cxx /= denom;
  cyy /= denom;
  cxy /= denom;
  double lambda_max =
      0.5 * (cxx + cyy + std::sqrt((cxx - cyy) * (cxx - cyy) + 4 * cxy * cxy));

  return TomographyEstimate{mean, std::sqrt(std::max(0.0, lambda_max)), good};
}

std::vector<ProbeRecord> load_probes_csv(std::istream& in) {
  std::vector<std::string> lines = io::read_data_lines(in);
  if (lines.empty()) throw InvalidArgument("empty probe file");
  if (io::split_csv(lines[0]) !=
      std::vector<std::string>{"label", "setting", "counts", "trials"})
    throw InvalidArgument("probe file must start with 'label,setting,counts,trials'");

  std::vector<ProbeRecord> probes;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = io::split_csv(lines[i]);
    if (f.size() != 4)
      throw InvalidArgument("probe rows need 4 fields: " + lines[i]);
    if (f[0].size() != 1)
      throw InvalidArgument("probe label must be a single character");
    char label = f[0][0];
    label_index(label);
    long long setting = io::parse_int(f[1], "setting");
    long long counts = io::parse_int(f[2], "counts");
    long long trials = io::parse_int(f[3], "trials");
    if (counts < 0) throw InvalidArgument("counts must be >= 0");
    if (trials <= 0) throw InvalidArgument("trials must be > 0");
    if (setting == 1) {
      ProbeRecord p;
      p.label = label;
      p.input = nominal_probe_state(label);
      probes.push_back(p);
    }
    if (probes.empty() || probes.back().label != label ||
        setting != static_cast<long long>(probes.back().counts.size()) + 1)
      throw InvalidArgument(
          "probe rows must be grouped per probe with settings ascending from 1");
    probes.back().counts.push_back(counts);
    probes.back().trials.push_back(trials);
  }
  if (probes.empty()) throw InvalidArgument("probe file has no data rows");
  std::size_t n = probes.front().counts.size();
  for (const ProbeRecord& p : probes)
    if (p.counts.size() != n)
      throw InvalidArgument("probes disagree on the number of settings");
  return probes;
}

void write_probes_csv(std::ostream& out, std::span<const ProbeRecord> probes) {
  out << "label,setting,counts,trials\n";
  for (const ProbeRecord& p : probes)
    for (std::size_t s = 0; s < p.counts.size(); ++s)
      out << p.label << ',' << (s + 1) << ',' << p.counts[s] << ','
          << p.trials[s] << "\n";
}

}  // namespace steering
