// steerkit: command-line front end for the steering library. Subcommands
// cover bound search, gain optimization, efficiency-grid curves,
// worst-case measurement rotation, measurement tomography, efficiency
// estimation from rate tables, trial simulation, residual analysis, the
// signalling-speed bound, and config-driven campaigns.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steering/bloch.hpp"
#include "steering/bounds.hpp"
#include "steering/conservative.hpp"
#include "steering/efficiency.hpp"
#include "steering/errors.hpp"
#include "steering/experiment.hpp"
#include "steering/io.hpp"
#include "steering/tomography.hpp"
#include "steering/version.hpp"

namespace {

using steering::BlochVector;
using steering::InvalidArgument;
using steering::MeasurementSet;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string g_command;  // full invocation, for output headers

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string format_vector(const BlochVector& v) {
  return format_double(v.x) + "," + format_double(v.y) + "," +
         format_double(v.z);
}

// Output sink: --output file or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidArgument("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_header(std::ostream& out, std::optional<std::uint64_t> seed,
                  const KeyValues& config) {
  steering::io::write_output_header(out, g_command, seed, config);
}

// ---- measurement-set input -------------------------------------------------

struct SetOptions {
  bool octahedral = false;
  std::string axes;
  std::string sigmas;
  std::string axes_csv;
};

void add_set_options(CLI::App* cmd, SetOptions& opts) {
  auto* oct = cmd->add_flag("--octahedral", opts.octahedral,
                            "use the ideal z/x/y measurement triad");
  auto* axes = cmd->add_option(
      "--axes", opts.axes,
      "inline axes 'x,y,z;x,y,z;...' (unit vectors, one per setting)");
  cmd->add_option("--sigmas", opts.sigmas,
                  "per-setting angular uncertainties in radians, 's1,s2,...'");
  auto* csv = cmd->add_option("--axes-csv", opts.axes_csv,
                              "axes CSV file with header x,y,z,sigma");
  oct->excludes(axes)->excludes(csv);
  axes->excludes(csv);
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  for (const std::string& field : steering::io::split_csv(text))
    out.push_back(steering::io::parse_double(field, what));
  return out;
}

MeasurementSet load_axes_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open axes file '" + path + "'");
  std::vector<std::string> lines = steering::io::read_data_lines(in);
  if (lines.empty()) throw InvalidArgument("empty axes file");
  if (steering::io::split_csv(lines[0]) !=
      std::vector<std::string>{"x", "y", "z", "sigma"})
    throw InvalidArgument("axes file must start with 'x,y,z,sigma'");
  std::vector<BlochVector> axes;
  std::vector<double> sigmas;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = steering::io::split_csv(lines[i]);
    if (f.size() != 4)
      throw InvalidArgument("axes rows need 4 fields: " + lines[i]);
    axes.push_back({steering::io::parse_double(f[0], "x"),
                    steering::io::parse_double(f[1], "y"),
                    steering::io::parse_double(f[2], "z")});
    sigmas.push_back(steering::io::parse_double(f[3], "sigma"));
  }
  return MeasurementSet(std::move(axes), std::move(sigmas));
}

MeasurementSet resolve_set(const SetOptions& opts) {
  if (!opts.axes_csv.empty()) {
    if (!opts.sigmas.empty())
      throw InvalidArgument("--sigmas only applies to --octahedral/--axes input");
    return load_axes_csv(opts.axes_csv);
  }
  std::vector<BlochVector> axes;
  if (opts.octahedral) {
    axes = steering::octahedral_set().axes();
  } else if (!opts.axes.empty()) {
    std::istringstream stream(opts.axes);
    std::string triple;
    while (std::getline(stream, triple, ';')) {
      std::vector<double> v = parse_number_list(triple, "axis component");
      if (v.size() != 3)
        throw InvalidArgument("each --axes entry needs three components");
      axes.push_back({v[0], v[1], v[2]});
    }
  } else {
    throw InvalidArgument(
        "choose a measurement set: --octahedral, --axes, or --axes-csv");
  }
  if (opts.sigmas.empty()) return MeasurementSet(std::move(axes));
  return MeasurementSet(std::move(axes),
                        parse_number_list(opts.sigmas, "sigma"));
}

KeyValues describe_set(const MeasurementSet& set) {
  KeyValues out;
  for (int j = 0; j < set.n(); ++j) {
    out.emplace_back("axis_" + std::to_string(j + 1),
                     format_vector(set.axis(j)) + " sigma=" +
                         format_double(set.sigma(j)));
  }
  return out;
}

void write_axes_csv(std::ostream& out, const MeasurementSet& set) {
  out << "x,y,z,sigma\n";
  for (int j = 0; j < set.n(); ++j) {
    const BlochVector& a = set.axis(j);
    out << format_double(a.x) << ',' << format_double(a.y) << ','
        << format_double(a.z) << ',' << format_double(set.sigma(j)) << "\n";
  }
}

// ---- subcommand state -------------------------------------------------------

struct BoundsArgs {
  SetOptions set;
  int d = 1;
  double r = 0.0;
  int threads = 0;
  std::string output;
};

struct OptimizeArgs {
  SetOptions set;
  int d = 1;
  double eta = 0.0;
  int threads = 0;
  std::string output;
};

struct CurveArgs {
  SetOptions set;
  int d = 1;
  double eta_min = 0.35;
  double eta_max = 1.0;
  int steps = 66;
  int threads = 0;
  std::string output;
};

struct ConservativeArgs {
  SetOptions set;
  double k_sigma = 5.0;
  int bits = 0;
  std::string output;
};

struct TomographyArgs {
  std::string probes;
  int setting = 1;
  int trials = 10000;
  std::uint64_t seed = 0;
  double wave_tolerance = 0.005;
  double angle_sigma = 0.1;
  int threads = 0;
  std::string output;
};

struct KlyshkoArgs {
  std::string rates;
  int j = 1;
  int k = 0;  // 0 = matched (j)
  double duration = 1.0;
  double pdl_allowance = 0.02;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  bool bias_study = false;
  double background = 200.0;
  double pair_prob = 0.0072;
  double trial_rate = 8e7;
  double pdl = 0.0;
  double mu = 0.98;
  std::string output;
};

struct SimulateArgs {
  double mu = 1.0;
  double alice_eff = 1.0;
  double bob_eff_plus = 1.0;
  double bob_eff_minus = 1.0;
  long long trials = 0;
  double dark = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

struct AnalyzeArgs {
  std::string counts;
  double r = 0.0;
  double bound = 0.0;
  std::string ratios;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  std::string output;
};

struct FtlArgs {
  double distance = 0.0;
  double time = 0.0;
  std::string output;
};

struct CampaignArgs {
  std::string config;
};

// ---- subcommand bodies ------------------------------------------------------

void run_bounds(const BoundsArgs& args) {
  MeasurementSet set = resolve_set(args.set);
  steering::BoundResult result =
      steering::steering_bound(set, args.d, args.r, args.threads);
  double ceiling = steering::tsirelson(set, args.d);

  Output out(args.output);
  KeyValues config = {{"d", std::to_string(args.d)},
                      {"r", format_double(args.r)}};
  KeyValues set_desc = describe_set(set);
  config.insert(config.end(), set_desc.begin(), set_desc.end());
  write_header(out.stream(), std::nullopt, config);
  out.stream() << "h = " << format_double(result.h) << "\n";
  out.stream() << "quantum_ceiling = " << format_double(ceiling) << "\n";
  out.stream() << "strategy_alpha =";
  for (int a : result.strategy.alpha) out.stream() << ' ' << a;
  out.stream() << "\nstrategy_ell =";
  for (int l : result.strategy.ell) out.stream() << ' ' << l;
  out.stream() << "\n";
  for (std::size_t l = 0; l < result.ensemble.states.size(); ++l) {
    out.stream() << "ensemble_" << (l + 1) << " = ";
    if (result.ensemble.states[l])
      out.stream() << format_vector(*result.ensemble.states[l]);
    else
      out.stream() << "none";
    out.stream() << "\n";
  }
}

void run_optimize(const OptimizeArgs& args) {
  MeasurementSet set = resolve_set(args.set);
  steering::GainResult result =
      steering::optimal_gain(set, args.d, args.eta, args.threads);
  Output out(args.output);
  KeyValues config = {{"d", std::to_string(args.d)},
                      {"eta", format_double(args.eta)}};
  KeyValues set_desc = describe_set(set);
  config.insert(config.end(), set_desc.begin(), set_desc.end());
  write_header(out.stream(), std::nullopt, config);
  out.stream() << "r = " << format_double(result.r) << "\n"
               << "h = " << format_double(result.h) << "\n"
               << "mu_min = " << format_double(result.mu_min) << "\n";
}

void run_curve(const CurveArgs& args) {
  if (args.steps < 2) throw InvalidArgument("curve needs at least 2 steps");
  if (!(args.eta_min > 0.0 && args.eta_min < args.eta_max && args.eta_max <= 1.0))
    throw InvalidArgument("need 0 < eta-min < eta-max <= 1");
  MeasurementSet set = resolve_set(args.set);
  std::vector<double> etas(args.steps);
  for (int i = 0; i < args.steps; ++i)
    etas[i] = args.eta_min +
              (args.eta_max - args.eta_min) * i / (args.steps - 1.0);
  std::vector<steering::CurvePoint> curve =
      steering::min_purity_curve(set, args.d, etas, args.threads);
  Output out(args.output);
  KeyValues config = {{"d", std::to_string(args.d)},
                      {"eta_min", format_double(args.eta_min)},
                      {"eta_max", format_double(args.eta_max)},
                      {"steps", std::to_string(args.steps)}};
  KeyValues set_desc = describe_set(set);
  config.insert(config.end(), set_desc.begin(), set_desc.end());
  write_header(out.stream(), std::nullopt, config);
  out.stream() << "eta,r,h,mu_min\n";
  for (const steering::CurvePoint& p : curve)
    out.stream() << format_double(p.eta) << ',' << format_double(p.r) << ','
                 << format_double(p.h) << ',' << format_double(p.mu_min)
                 << "\n";
}

void run_conservative(const ConservativeArgs& args) {
  MeasurementSet set = resolve_set(args.set);
  steering::ConservativeResult result =
      args.bits == 0 ? steering::worst_case_no_message(set, args.k_sigma)
                     : steering::worst_case_one_bit(set, args.k_sigma);
  Output out(args.output);
  KeyValues config = {{"message_bits", std::to_string(args.bits)},
                      {"k_sigma", format_double(args.k_sigma)}};
  KeyValues set_desc = describe_set(set);
  config.insert(config.end(), set_desc.begin(), set_desc.end());
  std::string signs;
  for (int s : result.combo.signs)
    signs += (signs.empty() ? "" : " ") + std::to_string(s);
  config.emplace_back("signs", signs);
  if (result.combo.pair)
    config.emplace_back("pair", std::to_string(result.combo.pair->first + 1) +
                                    "," +
                                    std::to_string(result.combo.pair->second + 1));
  write_header(out.stream(), std::nullopt, config);
  write_axes_csv(out.stream(), result.rotated);
}

void run_tomography(const TomographyArgs& args) {
  std::ifstream in(args.probes);
  if (!in) throw InvalidArgument("cannot open probe file '" + args.probes + "'");
  std::vector<steering::ProbeRecord> probes = steering::load_probes_csv(in);

  steering::AxisFit point = steering::fit_measurement_axis(probes, args.setting);
  steering::BootstrapOptions options;
  options.resample.wave_tolerance = args.wave_tolerance;
  options.resample.angle_sigma_deg = args.angle_sigma;
  options.trials = args.trials;
  options.seed = args.seed;
  options.threads = args.threads;
  steering::TomographyEstimate estimate =
      steering::bootstrap_tomography(probes, args.setting, options);

  Output out(args.output);
  write_header(out.stream(), args.seed,
               {{"probes", args.probes},
                {"setting", std::to_string(args.setting)},
                {"trials", std::to_string(args.trials)},
                {"wave_tolerance", format_double(args.wave_tolerance)},
                {"angle_sigma_deg", format_double(args.angle_sigma)}});
  out.stream() << "point_axis = " << format_vector(point.axis) << "\n"
               << "point_scale = " << format_double(point.scale) << "\n"
               << "axis = " << format_vector(estimate.axis) << "\n"
               << "sigma_rad = " << format_double(estimate.sigma) << "\n"
               << "samples = " << estimate.samples << "\n";
}

void run_klyshko(const KlyshkoArgs& args) {
  Output out(args.output);
  if (args.bias_study) {
    steering::BiasOptions options;
    options.mu = args.mu;
    steering::BiasReport report = steering::bias_study(
        args.background, args.pair_prob, args.trial_rate, args.pdl, options);
    write_header(out.stream(), std::nullopt,
                 {{"background_rate", format_double(args.background)},
                  {"pair_prob", format_double(args.pair_prob)},
                  {"trial_rate", format_double(args.trial_rate)},
                  {"pdl_fraction", format_double(args.pdl)},
                  {"mu", format_double(args.mu)}});
    out.stream() << "true_ratio = " << format_double(report.true_ratio) << "\n";
    const char* bases[3] = {"z", "x", "y"};
    for (int j = 0; j < 3; ++j)
      out.stream() << "basis_" << bases[j]
                   << " estimated = " << format_double(report.estimated[j])
                   << " bias = " << format_double(report.bias[j]) << "\n";
    return;
  }

  std::ifstream in(args.rates);
  if (!in) throw InvalidArgument("cannot open rate file '" + args.rates + "'");
  std::vector<steering::RateTable> windows =
      steering::load_rates_csv(in, args.duration);
  int j = args.j - 1;
  int k = (args.k == 0 ? args.j : args.k) - 1;

  KeyValues config = {{"rates", args.rates},
                      {"j", std::to_string(args.j)},
                      {"k", std::to_string(k + 1)},
                      {"duration_s", format_double(args.duration)},
                      {"pdl_allowance", format_double(args.pdl_allowance)}};
  std::optional<std::uint64_t> seed;
  if (args.bootstrap > 0) seed = args.seed;
  write_header(out.stream(), seed, config);

  out.stream() << "t,alpha_plus,alpha_plus_se,alpha_minus,alpha_minus_se,"
                  "beta_plus,beta_plus_se,beta_minus,beta_minus_se,"
                  "ratio,ratio_se\n";
  std::vector<double> ratios;
  std::vector<double> ratio_ses;
  for (std::size_t t = 0; t < windows.size(); ++t) {
    steering::EfficiencyEstimate est =
        steering::estimate_efficiencies(windows[t], k, j);
    ratios.push_back(est.ratio.value);
    ratio_ses.push_back(est.ratio.stderr_);
    out.stream() << t << ',' << format_double(est.alice[0].value) << ','
                 << format_double(est.alice[0].stderr_) << ','
                 << format_double(est.alice[1].value) << ','
                 << format_double(est.alice[1].stderr_) << ','
                 << format_double(est.bob[0].value) << ','
                 << format_double(est.bob[0].stderr_) << ','
                 << format_double(est.bob[1].value) << ','
                 << format_double(est.bob[1].stderr_) << ','
                 << format_double(est.ratio.value) << ','
                 << format_double(est.ratio.stderr_) << "\n";
  }

  std::size_t min_t = 0;
  for (std::size_t t = 1; t < ratios.size(); ++t)
    if (ratios[t] < ratios[min_t]) min_t = t;
  double conservative =
      ratios[min_t] * (1.0 - args.pdl_allowance) - 5.0 * ratio_ses[min_t];
  out.stream() << "# min_ratio_window = " << min_t << "\n";
  out.stream() << "# conservative_ratio = " << format_double(conservative)
               << "  (min ratio x (1 - pdl_allowance) - 5 x standard error)\n";

  if (args.bootstrap > 0) {
    double se = steering::bob_ratio_bootstrap_stderr(windows[min_t], j,
                                                     args.bootstrap, args.seed);
    out.stream() << "# bootstrap_ratio_se = " << format_double(se) << "\n";
  }

  if (windows.size() >= 4) {
    out.stream() << "# allan deviation of the per-window ratio series:\n";
    for (int w = 1; 2 * w <= static_cast<int>(windows.size()); w *= 2)
      out.stream() << "# allan_window_" << w << " = "
                   << format_double(steering::allan_deviation(ratios, w))
                   << "\n";
  }
}

void run_simulate(const SimulateArgs& args) {
  steering::ExperimentConfig config = steering::uniform_config(
      args.mu, args.alice_eff, 1.0, args.trials, args.seed);
  for (auto& e : config.bob_eff) e = {args.bob_eff_plus, args.bob_eff_minus};
  config.dark_prob = args.dark;
  steering::TrialCounts counts = steering::simulate(config);
  Output out(args.output);
  write_header(out.stream(), args.seed,
               {{"mu", format_double(args.mu)},
                {"alice_eff", format_double(args.alice_eff)},
                {"bob_eff_plus", format_double(args.bob_eff_plus)},
                {"bob_eff_minus", format_double(args.bob_eff_minus)},
                {"trials_per_pair", std::to_string(args.trials)},
                {"dark_prob", format_double(args.dark)}});
  steering::write_counts_csv(out.stream(), counts);
}

void run_analyze(const AnalyzeArgs& args) {
  std::ifstream in(args.counts);
  if (!in) throw InvalidArgument("cannot open counts file '" + args.counts + "'");
  steering::TrialCounts counts = steering::read_counts_csv(in);
  std::vector<double> ratios(counts.n(), 1.0);
  if (!args.ratios.empty()) {
    ratios = parse_number_list(args.ratios, "ratio");
    if (static_cast<int>(ratios.size()) != counts.n())
      throw InvalidArgument("need one ratio per setting");
  }
  steering::ResidualReport report =
      steering::estimate(counts, ratios, args.r, args.bound);

  Output out(args.output);
  std::optional<std::uint64_t> seed;
  if (args.bootstrap > 0) seed = args.seed;
  std::string ratio_text;
  for (double v : ratios)
    ratio_text += (ratio_text.empty() ? "" : ",") + format_double(v);
  write_header(out.stream(), seed,
               {{"counts", args.counts},
                {"r", format_double(args.r)},
                {"bound", format_double(args.bound)},
                {"ratios", ratio_text}});
  for (std::size_t j = 0; j < report.per_setting.size(); ++j)
    out.stream() << "e_corr_" << (j + 1) << " = "
                 << format_double(report.per_setting[j].e_corr)
                 << "  e_alice_" << (j + 1) << " = "
                 << format_double(report.per_setting[j].e_alice) << "\n";
  out.stream() << "s_value = " << format_double(report.s_value) << "\n"
               << "eta_alice = " << format_double(report.eta_alice) << "\n"
               << "bound = " << format_double(report.bound) << "\n"
               << "residual = " << format_double(report.residual) << "\n"
               << "stderr = " << format_double(report.stderr_) << "\n";
  if (args.bootstrap > 0)
    out.stream() << "bootstrap_stderr = "
                 << format_double(steering::estimate_bootstrap_stderr(
                        counts, ratios, args.r, args.bootstrap, args.seed))
                 << "\n";
}

void run_ftl(const FtlArgs& args) {
  steering::SpacetimeBound bound = steering::ftl_speed(args.distance, args.time);
  Output out(args.output);
  write_header(out.stream(), std::nullopt,
               {{"distance_m", format_double(args.distance)},
                {"time_s", format_double(args.time)}});
  out.stream() << "speed_m_per_s = " << format_double(bound.speed) << "\n"
               << "speed_over_c = " << format_double(bound.speed_over_c) << "\n"
               << "# note: straight-line distance over elapsed time; quoted\n"
                  "# experimental figures may instead use light-cone geometry,\n"
                  "# which this lower bound does not attempt to reconstruct.\n";
}

// ---- campaign ---------------------------------------------------------------

std::map<std::string, std::string> load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::vector<std::string> lines = steering::io::read_data_lines(in);
  for (const std::string& line : lines) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config lines must look like key = value: " + line);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument("empty config key in: " + line);
    if (!out.emplace(key, value).second)
      throw InvalidArgument("duplicate config key '" + key + "'");
  }
  return out;
}

void run_campaign(const CampaignArgs& args) {
  std::map<std::string, std::string> config = load_campaign_config(args.config);
  static const std::vector<std::string> known = {
      "set.source",   "set.sigmas",   "d",           "eta.min",
      "eta.max",      "eta.steps",    "sim.mu",      "sim.alice_eff",
      "sim.bob_eff",  "sim.trials",   "sim.seed",    "sim.dark",
      "out.dir"};
  for (const auto& [key, value] : config) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument("unknown config key '" + key + "'");
  }
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = config.find(key);
    return it == config.end() ? fallback : it->second;
  };
  auto require = [&](const std::string& key) {
    auto it = config.find(key);
    if (it == config.end())
      throw InvalidArgument("missing config key '" + key + "'");
    return it->second;
  };

  std::string out_dir = require("out.dir");
  std::error_code dir_error;
  std::filesystem::create_directories(out_dir, dir_error);
  if (dir_error)
    throw InvalidArgument("cannot create output directory '" + out_dir +
                          "': " + dir_error.message());

  SetOptions set_opts;
  std::string source = get("set.source", "octahedral");
  if (source == "octahedral") {
    set_opts.octahedral = true;
  } else if (source.rfind("csv:", 0) == 0) {
    set_opts.axes_csv = source.substr(4);
  } else if (source.rfind("inline:", 0) == 0) {
    set_opts.axes = source.substr(7);
    set_opts.sigmas = get("set.sigmas", "");
  } else {
    throw InvalidArgument(
        "set.source must be octahedral, csv:<path>, or inline:<axes>");
  }
  MeasurementSet set = resolve_set(set_opts);

  int d = static_cast<int>(steering::io::parse_int(get("d", "1"), "d"));

  CurveArgs curve;
  curve.set = set_opts;
  curve.d = d;
  curve.eta_min = steering::io::parse_double(get("eta.min", "0.35"), "eta.min");
  curve.eta_max = steering::io::parse_double(get("eta.max", "1.0"), "eta.max");
  curve.steps =
      static_cast<int>(steering::io::parse_int(get("eta.steps", "66"), "eta.steps"));
  curve.output = out_dir + "/curve.csv";
  run_curve(curve);

  double eta = steering::io::parse_double(get("sim.alice_eff", "1.0"),
                                          "sim.alice_eff");
  steering::GainResult gain = steering::optimal_gain(set, d, eta, 0);

  SimulateArgs sim;
  sim.mu = steering::io::parse_double(get("sim.mu", "1.0"), "sim.mu");
  sim.alice_eff = eta;
  sim.bob_eff_plus = sim.bob_eff_minus =
      steering::io::parse_double(get("sim.bob_eff", "1.0"), "sim.bob_eff");
  sim.trials = steering::io::parse_int(get("sim.trials", "100000"), "sim.trials");
  sim.dark = steering::io::parse_double(get("sim.dark", "0.0"), "sim.dark");
  sim.seed = static_cast<std::uint64_t>(
      steering::io::parse_int(get("sim.seed", "0"), "sim.seed"));
  sim.output = out_dir + "/counts.csv";
  run_simulate(sim);

  AnalyzeArgs analyze;
  analyze.counts = sim.output;
  analyze.r = gain.r;
  analyze.bound = gain.h;
  analyze.output = out_dir + "/report.txt";
  run_analyze(analyze);

  std::cout << "wrote " << curve.output << "\n"
            << "wrote " << sim.output << "\n"
            << "wrote " << analyze.output << " (r = " << format_double(gain.r)
            << ", h = " << format_double(gain.h)
            << ", mu_min = " << format_double(gain.mu_min) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    std::string arg = argv[i];
    // The destination is not part of the result; leaving it out keeps equal
    // invocations byte-identical regardless of where they are written.
    if (arg == "--output") {
      ++i;
      continue;
    }
    if (arg.rfind("--output=", 0) == 0) continue;
    if (i == 0) {
      std::size_t slash = arg.find_last_of('/');
      if (slash != std::string::npos) arg = arg.substr(slash + 1);
    }
    if (!g_command.empty()) g_command += ' ';
    g_command += arg.find(' ') == std::string::npos ? arg : '"' + arg + '"';
  }

  CLI::App app{"steering bounds, calibration, and trial simulation toolkit"};
  app.set_version_flag("--version", std::string("steerkit ") + steering::kVersion);
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "classical bound at a fixed penalty r");
  add_set_options(bounds_cmd, bounds.set);
  bounds_cmd->add_option("--d", bounds.d, "number of message values");
  bounds_cmd->add_option("--r", bounds.r, "null-result penalty in [0,1]");
  bounds_cmd->add_option("--threads", bounds.threads, "worker threads");
  bounds_cmd->add_option("--output", bounds.output, "output file (default stdout)");
  bounds_cmd->callback([&] { run_bounds(bounds); });

  OptimizeArgs optimize;
  auto* optimize_cmd = app.add_subcommand(
      "optimize", "penalty minimizing the required purity at one efficiency");
  add_set_options(optimize_cmd, optimize.set);
  optimize_cmd->add_option("--d", optimize.d, "number of message values");
  optimize_cmd->add_option("--eta", optimize.eta, "heralding efficiency")
      ->required();
  optimize_cmd->add_option("--threads", optimize.threads, "worker threads");
  optimize_cmd->add_option("--output", optimize.output,
                           "output file (default stdout)");
  optimize_cmd->callback([&] { run_optimize(optimize); });

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand(
      "curve", "minimum usable purity over an efficiency grid (CSV)");
  add_set_options(curve_cmd, curve.set);
  curve_cmd->add_option("--d", curve.d, "number of message values");
  curve_cmd->add_option("--eta-min", curve.eta_min, "grid start (default 0.35)");
  curve_cmd->add_option("--eta-max", curve.eta_max, "grid end (default 1.0)");
  curve_cmd->add_option("--steps", curve.steps, "grid points (default 66)");
  curve_cmd->add_option("--threads", curve.threads, "worker threads");
  curve_cmd->add_option("--output", curve.output, "output file (default stdout)");
  curve_cmd->callback([&] { run_curve(curve); });

  ConservativeArgs conservative;
  auto* conservative_cmd = app.add_subcommand(
      "conservative", "worst-case rotation of a measured triad (axes CSV)");
  add_set_options(conservative_cmd, conservative.set);
  conservative_cmd->add_option("--k-sigma", conservative.k_sigma,
                               "rotation amplitude in units of sigma");
  conservative_cmd
      ->add_option("--bits", conservative.bits,
                   "messages available to the cheat: 0 = none, 1 = one bit")
      ->check(CLI::Range(0, 1));
  conservative_cmd->add_option("--output", conservative.output,
                               "output file (default stdout)");
  conservative_cmd->callback([&] { run_conservative(conservative); });

  TomographyArgs tomography;
  auto* tomography_cmd = app.add_subcommand(
      "tomography", "bootstrapped measurement-axis fit from a probe CSV");
  tomography_cmd->add_option("--probes", tomography.probes, "probe CSV file")
      ->required();
  tomography_cmd->add_option("--setting", tomography.setting,
                             "measurement setting (1-based)");
  tomography_cmd->add_option("--trials", tomography.trials, "bootstrap trials");
  tomography_cmd->add_option("--seed", tomography.seed, "master seed");
  tomography_cmd->add_option("--wave-tolerance", tomography.wave_tolerance,
                             "plate retardance tolerance (waves)");
  tomography_cmd->add_option("--angle-sigma", tomography.angle_sigma,
                             "plate zero-angle sigma (degrees)");
  tomography_cmd->add_option("--threads", tomography.threads, "worker threads");
  tomography_cmd->add_option("--output", tomography.output,
                             "output file (default stdout)");
  tomography_cmd->callback([&] { run_tomography(tomography); });

  KlyshkoArgs klyshko;
  auto* klyshko_cmd = app.add_subcommand(
      "klyshko", "detector efficiencies and ratio from rate tables");
  auto* rates_opt =
      klyshko_cmd->add_option("--rates", klyshko.rates, "rate CSV file");
  klyshko_cmd->add_option("--j", klyshko.j, "Bob setting (1-based)");
  klyshko_cmd->add_option("--k", klyshko.k,
                          "Alice setting (1-based; default matched)");
  klyshko_cmd->add_option("--duration", klyshko.duration,
                          "seconds per acquisition window");
  klyshko_cmd->add_option("--pdl-allowance", klyshko.pdl_allowance,
                          "fractional allowance for polarization-dependent loss");
  klyshko_cmd->add_option("--bootstrap", klyshko.bootstrap,
                          "bootstrap resamples for the ratio standard error");
  klyshko_cmd->add_option("--seed", klyshko.seed, "bootstrap seed");
  auto* bias_opt = klyshko_cmd->add_flag(
      "--bias-study", klyshko.bias_study,
      "run the analytic systematic-bias study instead of reading rates");
  klyshko_cmd->add_option("--background", klyshko.background,
                          "bias study: background clicks per second");
  klyshko_cmd->add_option("--pair-prob", klyshko.pair_prob,
                          "bias study: pair probability per trial");
  klyshko_cmd->add_option("--trial-rate", klyshko.trial_rate,
                          "bias study: trials per second");
  klyshko_cmd->add_option("--pdl", klyshko.pdl,
                          "bias study: polarization-dependent loss fraction");
  klyshko_cmd->add_option("--mu", klyshko.mu, "bias study: source purity");
  klyshko_cmd->add_option("--output", klyshko.output,
                          "output file (default stdout)");
  bias_opt->excludes(rates_opt);
  klyshko_cmd->callback([&] {
    if (!klyshko.bias_study && klyshko.rates.empty())
      throw InvalidArgument("klyshko needs --rates or --bias-study");
    run_klyshko(klyshko);
  });

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "sample trial counts for a lossy singlet (counts CSV)");
  simulate_cmd->add_option("--mu", simulate.mu, "source purity in [0,1]");
  simulate_cmd->add_option("--alice-eff", simulate.alice_eff,
                           "Alice detector efficiency (both outcomes)");
  simulate_cmd->add_option("--bob-eff-plus", simulate.bob_eff_plus,
                           "Bob +1 detector efficiency");
  simulate_cmd->add_option("--bob-eff-minus", simulate.bob_eff_minus,
                           "Bob -1 detector efficiency");
  simulate_cmd->add_option("--trials", simulate.trials, "trials per setting pair")
      ->required();
  simulate_cmd->add_option("--dark", simulate.dark,
                           "dark-count probability per detector per trial");
  simulate_cmd->add_option("--seed", simulate.seed, "random seed");
  simulate_cmd->add_option("--output", simulate.output,
                           "output file (default stdout)");
  simulate_cmd->callback([&] { run_simulate(simulate); });

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "residual report from a counts CSV at a given bound");
  analyze_cmd->add_option("--counts", analyze.counts, "counts CSV file")
      ->required();
  analyze_cmd->add_option("--r", analyze.r, "null-result penalty in [0,1]");
  analyze_cmd->add_option("--bound", analyze.bound, "classical bound h");
  analyze_cmd->add_option("--ratios", analyze.ratios,
                          "per-setting Bob efficiency ratios 'r1,r2,...'");
  analyze_cmd->add_option("--bootstrap", analyze.bootstrap,
                          "bootstrap resamples for a standard-error cross-check");
  analyze_cmd->add_option("--seed", analyze.seed, "bootstrap seed");
  analyze_cmd->add_option("--output", analyze.output,
                          "output file (default stdout)");
  analyze_cmd->callback([&] { run_analyze(analyze); });

  FtlArgs ftl;
  auto* ftl_cmd = app.add_subcommand(
      "ftl", "minimum signalling speed between spacelike-separated events");
  ftl_cmd->add_option("--distance", ftl.distance, "separation in meters")
      ->required();
  ftl_cmd->add_option("--time", ftl.time, "elapsed time in seconds")->required();
  ftl_cmd->add_option("--output", ftl.output, "output file (default stdout)");
  ftl_cmd->callback([&] { run_ftl(ftl); });

  CampaignArgs campaign;
  auto* campaign_cmd = app.add_subcommand(
      "campaign", "curve + simulate + analyze pipeline from a key=value config");
  campaign_cmd->add_option("--config", campaign.config, "config file")
      ->required();
  campaign_cmd->callback([&] { run_campaign(campaign); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const steering::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return e.category() == "invalid-argument" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
