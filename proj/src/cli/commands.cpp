#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "qmatch/cli.hpp"
#include "qmatch/errors.hpp"
#include "qmatch/simdesign.hpp"

namespace qmatch::cli {

namespace {

using nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

ordered_json manifest(const std::string& command, ordered_json config, std::uint64_t seed) {
  ordered_json m;
  m["command"] = command;
  m["config"] = std::move(config);
  m["tool_version"] = kToolVersion;
  m["seed"] = seed;
  m["timestamp"] = utc_timestamp();
  return m;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// Seed recorded next to a data file by `simulate`, or 0 when there is none.
std::uint64_t seed_of_input(const std::filesystem::path& input) {
  std::filesystem::path side = input;
  side += ".manifest.json";
  std::ifstream in(side);
  if (!in) return 0;
  try {
    const auto j = ordered_json::parse(in);
    return j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception&) {
    return 0;
  }
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const char* suffix) {
  std::filesystem::path out = p;
  out += suffix;
  return out;
}

// JSON has no infinity; nu = 1/inv_nu is reported as null at inv_nu = 0.
ordered_json nu_of(double inv_nu) {
  return inv_nu == 0.0 ? ordered_json(nullptr) : ordered_json(1.0 / inv_nu);
}

ordered_json profile_json(const ReducedProfileLoglik& r) {
  return ordered_json{{"target", r.target},
                      {"det_term", r.det_term},
                      {"jacobian_term", r.jacobian_term},
                      {"value", r.value}};
}

ModelKind parse_model(const std::string& name) {
  if (name == "fixed") return ModelKind::fixed_effects;
  if (name == "random") return ModelKind::random_effects;
  throw UsageError("--model must be fixed or random");
}

struct SimulateArgs {
  SimConfig config;
  std::string effects = "gaussian";
  std::string out;
};

struct ProfileArgs {
  std::string family;
  std::string model = "fixed";
  std::string input;
  std::string out;
  std::string summary;
  std::string grid;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::optional<double> grid_step;
  bool refine = false;
  unsigned threads = 0;
};

struct CompareArgs {
  std::string a;
  std::string b;
  std::string model = "fixed";
  std::string input;
  std::string out;
};

struct CorrelateArgs {
  std::string input;
  std::string targets;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  SimConfig config = args.config;
  if (args.effects == "gaussian") {
    config.effects = EffectDistribution::gaussian;
  } else if (args.effects == "cauchy") {
    config.effects = EffectDistribution::cauchy;
  } else {
    throw UsageError("--effects must be gaussian or cauchy");
  }
  const SimOutput sim = simulate(config);

  DataSet data;
  data.y = sim.y;
  data.nrows = config.nrows;
  data.ncols = config.ncols;
  data.layout = sim.design.layout();
  const std::filesystem::path path(args.out);
  write_data_csv(path, data);

  ordered_json cfg{{"nrows", config.nrows},       {"ncols", config.ncols},
                   {"effects", args.effects},     {"intercept", config.intercept},
                   {"noise_sd", config.noise_sd}, {"seed", config.seed},
                   {"out", args.out}};
  write_json(with_suffix(path, ".manifest.json"), manifest("simulate", cfg, config.seed));
  out << "wrote " << sim.y.size() << " observations (" << config.nrows << "x" << config.ncols
      << ") to " << path.string() << '\n';
  return kOk;
}

std::vector<double> resolve_grid(const ProfileArgs& args) {
  if (!args.grid.empty()) {
    std::vector<double> grid;
    std::stringstream ss(args.grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        grid.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("--grid entries must be numbers, got '" + item + "'");
      }
    }
    if (grid.empty()) throw UsageError("--grid is empty");
    return grid;
  }
  double lo = -1.0;
  double hi = 1.0;
  double step = 0.05;
  if (args.family == "t") {
    lo = 0.0;
    step = 0.02;
  } else if (args.family == "alpha") {
    step = 0.01;
  }
  return linear_grid(args.grid_min.value_or(lo), args.grid_max.value_or(hi),
                     args.grid_step.value_or(step));
}

int cmd_profile(const ProfileArgs& args, std::ostream& out) {
  const ModelKind model = parse_model(args.model);
  const DataSet data = read_data_csv(args.input);
  const DesignSpec design = data.design(model);
  const std::vector<double> grid = resolve_grid(args);

  ProfileOptions options;
  options.refine = args.refine;
  options.threads = args.threads;

  ProfileCurve curve;
  if (args.family == "t") {
    curve = profile_student_t(data.y, design, grid, options);
  } else if (args.family == "alpha") {
    curve = profile_alpha(data.y, design, grid, options);
  } else if (args.family == "boxcox") {
    curve = boxcox_profile(data.y, design, grid, options);
  } else {
    throw UsageError("--family must be t, alpha or boxcox");
  }

  const std::filesystem::path curve_path(args.out);
  write_curve_csv(curve_path, curve);

  ordered_json warnings = ordered_json::array();
  for (const auto& p : curve.points) {
    if (!p.ok) warnings.push_back("grid point " + format_double(p.param) + " failed: " + p.error);
  }

  ordered_json comparators = ordered_json::object();
  if (curve.family != ProfileFamily::boxcox) {
    const PercentileVector pc = percentiles(data.y);
    comparators["gaussian"] = profile_json(reduced_profile_loglik(pc, TargetDistribution::gaussian(), design));
    comparators["logistic"] = profile_json(reduced_profile_loglik(pc, TargetDistribution::logistic(), design));
    if (curve.family == ProfileFamily::alpha_beta_diagonal) {
      ProfileOptions t_options = options;
      t_options.refine = true;
      const auto t_grid = default_inv_nu_grid();
      const ProfileCurve t_curve = profile_student_t(data.y, design, t_grid, t_options);
      comparators["t_argmax"] = ordered_json{{"inv_nu", t_curve.argmax_param},
                                             {"nu", nu_of(t_curve.argmax_param)},
                                             {"value", t_curve.argmax_value}};
    }
  }

  ordered_json cfg{{"family", args.family},
                   {"model", args.model},
                   {"input", args.input},
                   {"out", args.out},
                   {"grid_points", grid.size()},
                   {"grid_min", curve.points.front().param},
                   {"grid_max", curve.points.back().param},
                   {"refine", args.refine}};
  ordered_json summary;
  summary["manifest"] = manifest("profile", cfg, seed_of_input(args.input));
  summary["family"] = args.family;
  summary["model"] = args.model;
  summary["n"] = data.y.size();
  summary["argmax_param"] = curve.argmax_param;
  if (curve.family == ProfileFamily::student_t) summary["argmax_nu"] = nu_of(curve.argmax_param);
  summary["argmax_value"] = curve.argmax_value;
  summary["refined"] = curve.refined;
  summary["failures"] = curve.failures();
  summary["warnings"] = warnings;
  summary["comparators"] = comparators;

  const std::filesystem::path summary_path =
      args.summary.empty() ? with_suffix(curve_path, ".summary.json") : std::filesystem::path(args.summary);
  write_json(summary_path, summary);

  out << "family " << args.family << ", model " << args.model << ": argmax at "
      << format_double(curve.argmax_param) << " (value " << format_double(curve.argmax_value) << ")\n";
  return kOk;
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  const ModelKind model = parse_model(args.model);
  const TargetDistribution a = parse_target_spec(args.a);
  const TargetDistribution b = parse_target_spec(args.b);
  const DataSet data = read_data_csv(args.input);
  const DesignSpec design = data.design(model);

  const PercentileVector pc = percentiles(data.y);
  const auto ra = reduced_profile_loglik(pc, a, design);
  const auto rb = reduced_profile_loglik(pc, b, design);

  ordered_json report;
  report["manifest"] = manifest("compare",
                                ordered_json{{"a", args.a}, {"b", args.b}, {"model", args.model},
                                             {"input", args.input}},
                                seed_of_input(args.input));
  report["n"] = data.y.size();
  report["lr"] = ra.value - rb.value;
  report["a"] = profile_json(ra);
  report["b"] = profile_json(rb);

  auto is = [](const TargetDistribution& d, TargetKind k) {
    return d.kind() == k && d.shift() == 0.0 && d.scale() == 1.0;
  };
  auto pair_of = [&](TargetKind x, TargetKind y) {
    return (is(a, x) && is(b, y)) || (is(a, y) && is(b, x));
  };
  if (pair_of(TargetKind::gaussian, TargetKind::uniform)) {
    const auto d = lr_diagnostics_gaussian_uniform(data.y, design);
    report["gaussian_uniform"] = ordered_json{{"lr", d.lr},
                                              {"det_term", d.det_term},
                                              {"det_prediction", d.det_prediction},
                                              {"correction_term", d.correction_term},
                                              {"correction_prediction", d.correction_prediction}};
  }
  if (pair_of(TargetKind::logistic, TargetKind::uniform)) {
    const auto d = lr_diagnostics_logistic_uniform(data.y, design);
    report["logistic_uniform"] = ordered_json{{"lr", d.lr},
                                              {"det_term", d.det_term},
                                              {"jacobian_term", d.jacobian_term},
                                              {"approximation_2n", d.approximation}};
  }

  out << report.dump(2) << '\n';
  if (!args.out.empty()) write_json(args.out, report);
  return kOk;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

int cmd_correlate(const CorrelateArgs& args, std::ostream& out) {
  const std::vector<TargetDistribution> targets = parse_target_list(args.targets);
  const DataSet data = read_data_csv(args.input);
  const std::vector<double> corr = correlation_report(data.y, targets);

  std::vector<std::string> labels;
  for (const auto& t : targets) labels.push_back(t.label());

  if (!args.out.empty()) {
    std::ofstream csv(args.out, std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot open '" + args.out + "' for writing");
    csv << "variable";
    for (const auto& l : labels) csv << ',' << csv_quote(l);
    csv << "\nidentity";
    for (double c : corr) csv << ',' << format_double(c);
    csv << '\n';
    csv.flush();
    if (!csv) throw IoError("write to '" + args.out + "' failed");
  }

  std::size_t width = 10;
  for (const auto& l : labels) width = std::max(width, l.size() + 2);
  out << "Correlations with quantile-transformed variables\n";
  out << std::left << std::setw(10) << "";
  for (const auto& l : labels) out << std::right << std::setw(static_cast<int>(width)) << l;
  out << '\n' << std::left << std::setw(10) << "identity";
  out << std::fixed << std::setprecision(3);
  for (double c : corr) out << std::right << std::setw(static_cast<int>(width)) << c;
  out << '\n';
  out.unsetf(std::ios::floatfield);
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compare quantile-matching transformations by profile likelihood", "qmatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate an additive row-column design");
  simulate_cmd->add_option("--nrows", sim.config.nrows, "Number of rows")->capture_default_str();
  simulate_cmd->add_option("--ncols", sim.config.ncols, "Number of columns")->capture_default_str();
  simulate_cmd->add_option("--effects", sim.effects, "Row/column effect law: gaussian | cauchy")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", sim.config.seed, "64-bit unsigned seed")->capture_default_str();
  simulate_cmd->add_option("--intercept", sim.config.intercept)->capture_default_str();
  simulate_cmd->add_option("--noise-sd", sim.config.noise_sd)->capture_default_str();
  simulate_cmd->add_option("--out", sim.out, "Output data CSV")->required();

  ProfileArgs prof;
  auto* profile_cmd = app.add_subcommand("profile", "Profile log likelihood over a family");
  profile_cmd->add_option("--family", prof.family, "t | alpha | boxcox")->required();
  profile_cmd->add_option("--model", prof.model, "fixed | random")->capture_default_str();
  profile_cmd->add_option("--input", prof.input, "Data CSV (index,row,col,y)")->required();
  profile_cmd->add_option("--out", prof.out, "Curve CSV")->required();
  profile_cmd->add_option("--summary", prof.summary, "Summary JSON (default <out>.summary.json)");
  profile_cmd->add_option("--grid", prof.grid, "Explicit comma-separated grid");
  profile_cmd->add_option("--grid-min", prof.grid_min);
  profile_cmd->add_option("--grid-max", prof.grid_max);
  profile_cmd->add_option("--grid-step", prof.grid_step);
  profile_cmd->add_flag("--refine", prof.refine, "Golden-section refinement around the best grid point");
  profile_cmd->add_option("--threads", prof.threads, "Worker threads (0 = all cores)");

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Log likelihood ratio of two targets");
  compare_cmd->add_option("--a", cmp.a, "Target spec favoured by positive values")->required();
  compare_cmd->add_option("--b", cmp.b, "Reference target spec")->required();
  compare_cmd->add_option("--model", cmp.model, "fixed | random")->capture_default_str();
  compare_cmd->add_option("--input", cmp.input, "Data CSV")->required();
  compare_cmd->add_option("--out", cmp.out, "Also write the JSON report here");

  CorrelateArgs cor;
  auto* correlate_cmd = app.add_subcommand("correlate", "Correlate y with quantile-matched versions");
  correlate_cmd->add_option("--input", cor.input, "Data CSV")->required();
  correlate_cmd->add_option("--targets", cor.targets, "Comma list of target specs")->required();
  correlate_cmd->add_option("--out", cor.out, "Correlation CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*profile_cmd) return cmd_profile(prof, out);
    if (*compare_cmd) return cmd_compare(cmp, out);
    if (*correlate_cmd) return cmd_correlate(cor, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kDataError;
  } catch (const DegenerateFitError& e) {
    err << "degenerate transformation: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("qmatch");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace qmatch::cli
