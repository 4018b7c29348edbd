#include "commands.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace meanfield::cli {

namespace {

using io::Json;

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::ConfigParse, what); }

template <class T>
T get_or(const Json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_fail(std::string("config key '") + key + "': " + e.what());
  }
}

ValidatedModel load_model(const Json& config) {
  if (!config.is_object()) config_fail("config must be a JSON object");
  const Json& m = config.contains("model") ? config.at("model") : config;
  return validate_model(io::model_from_json(m));
}

SolverOptions solver_options(const Json& config, const GlobalFlags& flags) {
  SolverOptions o = config.contains("solver") ? io::solver_options_from_json(config.at("solver")) : SolverOptions{};
  o.threads = flags.threads;
  return o;
}

ExactOptions exact_options(const Json& config, const GlobalFlags& flags) {
  ExactOptions o;
  o.max_lattice = get_or<std::size_t>(config, "max_lattice", o.max_lattice);
  o.threads = flags.threads;
  return o;
}

Sizes load_sizes(const Json& config, const ValidatedModel& model) {
  if (config.contains("sizes")) {
    const auto sizes = get_or<std::vector<int>>(config, "sizes", {});
    if (static_cast<int>(sizes.size()) != model.species()) config_fail("'sizes' needs one entry per species");
    return sizes;
  }
  if (config.contains("N")) return sizes_for_total(model, get_or<long>(config, "N", 0));
  config_fail("config needs 'sizes' or 'N'");
}

std::uint64_t require_seed(const Json& config, const GlobalFlags& flags) {
  if (flags.seed) return *flags.seed;
  if (config.contains("seed")) return get_or<std::uint64_t>(config, "seed", 0);
  config_fail("sampling needs a seed (--seed or 'seed' in the config)");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    double v = 0.0;
    const auto b = part.find_first_not_of(' ');
    const auto e = part.find_last_not_of(' ');
    if (b == std::string::npos) config_fail("empty entry in '" + text + "'");
    const char* first = part.data() + b;
    const char* last = part.data() + e + 1;
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) config_fail("not a number: '" + part + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> load_J_grid(const Json& config) {
  if (!config.contains("J_grid")) config_fail("phase scan needs 'J_grid'");
  const Json& g = config.at("J_grid");
  if (g.is_array()) return get_or<std::vector<double>>(config, "J_grid", {});
  const double from = get_or<double>(g, "from", 0.0);
  const double step = get_or<double>(g, "step", 0.0);
  const int count = get_or<int>(g, "count", 0);
  if (!(step > 0.0) || count < 1) config_fail("'J_grid' needs from, step > 0 and count >= 1");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(from + step * i);
  return out;
}

}  // namespace

CommandOutput cmd_solve(const Json& config, const GlobalFlags& flags) {
  const ValidatedModel model = load_model(config);
  const SolverOptions opts = solver_options(config, flags);
  Json report = io::pressure_to_json(pressure_limit(model, opts));
  report["model"] = io::model_to_json(model.spec());
  report["solver"] = io::solver_options_to_json(opts);
  report["solver"].erase("threads");
  return {dump(report), std::nullopt};
}

CommandOutput cmd_pressure(const Json& config, const GlobalFlags& flags) {
  const ValidatedModel model = load_model(config);
  const auto ladder = get_or<std::vector<long>>(config, "ladder", {100, 200, 400, 800, 1600, 3200});
  const PressureResult limit = pressure_limit(model, solver_options(config, flags));
  const ExactOptions eo = exact_options(config, flags);
  std::ostringstream out;
  out << "N,p_N,limit,lower_bound,upper_bound,gap\n";
  for (long N : ladder) {
    const Sizes sizes = sizes_for_total(model, N);
    const double p = finite_pressure(model, sizes, eo);
    double half_log = 0.0;
    double log_plus = 0.0;
    for (int s : sizes) {
      half_log += 0.5 * std::log(static_cast<double>(s));
      log_plus += std::log(s + 1.0);
    }
    const double lower = limit.limit_value - (std::log(3.0) + half_log) / N;
    const double upper = limit.limit_value + log_plus / N;
    out << N << ',' << io::format_double(p) << ',' << io::format_double(limit.limit_value) << ','
        << io::format_double(lower) << ',' << io::format_double(upper) << ','
        << io::format_double(p - limit.limit_value) << '\n';
  }
  return {out.str(), std::nullopt};
}

CommandOutput cmd_sample(const Json& config, const GlobalFlags& flags) {
  const ValidatedModel model = load_model(config);
  const Sizes sizes = load_sizes(config, model);
  const long M = get_or<long>(config, "M", -1);
  if (M < 0) config_fail("sampling needs a non-negative 'M'");
  const SampleSet s = exact_sample(model, sizes, static_cast<std::size_t>(M), require_seed(config, flags),
                                   exact_options(config, flags));
  std::ostringstream out;
  io::write_samples_csv(out, s);
  return {out.str(), std::nullopt};
}

CommandOutput cmd_limits(const Json& config, const GlobalFlags& flags) {
  const ValidatedModel model = load_model(config);
  const SolverOptions opts = solver_options(config, flags);
  const PressureResult pr = pressure_limit(model, opts);
  const int n = model.species();

  Json report;
  report["magnetization_law"] = io::law_to_json(magnetization_limit_law(model, pr.maxima));

  // Pick the maximum: nearest to the requested centre, else the unique one.
  const MaximumClassification* chosen = &pr.maxima.front();
  bool conditioned = false;
  std::optional<double> radius;
  if (config.contains("centre")) {
    const Vector c = io::vector_from_json(config.at("centre"));
    if (c.size() != n) fail(ErrorCode::DimensionMismatch, "'centre' needs one entry per species");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : pr.maxima) {
      const double d = (m.point.x - c).norm();
      if (d < best) {
        best = d;
        chosen = &m;
      }
    }
    conditioned = true;
    radius = get_or<double>(config, "radius", 0.3);
  }
  const LimitLaw law = build_limit_law(model, *chosen, conditioned, opts);
  report["maximum"] = io::classification_to_json(*chosen);
  report["conditioned"] = conditioned;
  report["radius"] = radius ? Json(*radius) : Json(nullptr);
  report["law"] = io::law_to_json(law);

  CommandOutput result;
  if (config.contains("sizes") || config.contains("N")) {
    const Sizes sizes = load_sizes(config, model);
    const DiscreteLaw exact =
        normalized_sum_law(model, sizes, chosen->point.x, chosen->k, radius, exact_options(config, flags));
    Json cmp;
    cmp["sizes"] = sizes;
    cmp["covariance"] = io::matrix_to_json(exact.covariance());
    if (n == 1) {
      cmp["ks_distance"] = ks_distance(exact, law);
    } else if (const auto* g = std::get_if<GaussianLaw>(&law)) {
      Json ks = Json::array();
      for (int l = 0; l < n; ++l)
        ks.push_back(ks_distance(exact.marginal(l), LimitLaw{GaussianLaw{g->cov.block(l, l, 1, 1)}}));
      cmp["marginal_ks_distance"] = ks;
    }
    report["finite_n"] = cmp;
    std::ostringstream csv;
    io::write_discrete_law_csv(csv, exact);
    result.secondary = csv.str();
  }
  result.primary = dump(report);
  return result;
}

CommandOutput cmd_invert(const Json& config, const GlobalFlags& flags, const InvertFlags& inv) {
  std::string path;
  if (inv.samples) {
    path = *inv.samples;
  } else if (config.contains("samples")) {
    path = get_or<std::string>(config, "samples", "");
  } else {
    config_fail("invert needs --samples or 'samples' in the config");
  }
  std::istringstream in(io::read_text_file(path));
  const SampleSet samples = io::read_samples_csv(in);

  Vector alpha;
  if (config.contains("model") || config.contains("n")) {
    alpha = load_model(config).alpha();
  } else if (config.contains("alpha")) {
    alpha = io::vector_from_json(config.at("alpha"));
  } else {
    double total = 0.0;
    for (int s : samples.sizes) total += s;
    alpha.resize(samples.n);
    for (int l = 0; l < samples.n; ++l) alpha[l] = samples.sizes[l] / total;
  }
  if (alpha.size() != samples.n) fail(ErrorCode::DimensionMismatch, "alpha and sample species differ");

  InverseEstimate e;
  if (inv.ball) {
    const std::vector<double> v = parse_number_list(*inv.ball);
    if (static_cast<int>(v.size()) != samples.n + 1) config_fail("--ball takes n centre coordinates and a radius");
    const Vector centre = Eigen::Map<const Vector>(v.data(), samples.n);
    e = invert_conditioned(samples, centre, v.back(), alpha);
  } else {
    e = mle_fit(samples, alpha, exact_options(config, flags));
  }
  return {dump(io::estimate_to_json(e)), std::nullopt};
}

CommandOutput cmd_phase(const Json& config, const GlobalFlags& flags) {
  if (!config.is_object()) config_fail("config must be a JSON object");
  const std::vector<double> grid = load_J_grid(config);
  const double h = get_or<double>(config, "h", 0.0);
  std::ostringstream out;
  io::write_phase_csv(out, cw_phase_scan(grid, h, solver_options(config, flags)));
  return {out.str(), std::nullopt};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"meanfield: forward and inverse computations for multi-species mean-field spin models"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes:\n"
      "  0  success\n"
      "  2  configuration or validation error\n"
      "  3  numeric precondition failed\n"
      "  4  file input/output error\n"
      "  5  internal error\n"
      "Errors are reported on stderr as a JSON object {\"error\", \"message\", \"exit_code\"}.");

  GlobalFlags flags;
  InvertFlags inv;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_path, "output file (stdout if omitted)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed for sampling");
  app.add_option("--threads", flags.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "fixed points, classified maxima and pressure limit (JSON)");
  auto* pressure = app.add_subcommand("pressure", "finite-N pressure ladder with sandwich bounds (CSV)");
  auto* sample = app.add_subcommand("sample", "exact i.i.d. draws of species spin sums (CSV)");
  auto* limits = app.add_subcommand("limits", "limit law and finite-N comparison (JSON, law CSV next to --out)");
  auto* invert = app.add_subcommand("invert", "estimate J and h from a sample file (JSON)");
  auto* phase = app.add_subcommand("phase", "Curie-Weiss phase scan (CSV)");
  invert->add_option("--samples", inv.samples, "sample CSV file");
  invert->add_option("--ball", inv.ball, "condition on a ball: c_1,...,c_n,radius");
  for (auto* sub : {solve, pressure, sample, limits, invert, phase}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << io::error_json(Error(ErrorCode::ConfigParse, e.what())).dump() << '\n';
    return 2;
  }

  try {
    if (!config_path.empty()) flags.config = config_path;
    if (!out_path.empty()) flags.out = out_path;
    if (seed_opt->count() > 0) flags.seed = seed;
    const Json config = flags.config ? io::read_json_file(*flags.config) : Json::object();

    CommandOutput result;
    if (*solve) result = cmd_solve(config, flags);
    if (*pressure) result = cmd_pressure(config, flags);
    if (*sample) result = cmd_sample(config, flags);
    if (*limits) result = cmd_limits(config, flags);
    if (*invert) result = cmd_invert(config, flags, inv);
    if (*phase) result = cmd_phase(config, flags);

    if (flags.out) {
      io::write_text_file(*flags.out, result.primary);
      if (result.secondary) io::write_text_file(*flags.out + ".csv", *result.secondary);
    } else {
      out << result.primary;
    }
    return 0;
  } catch (const Error& e) {
    err << io::error_json(e).dump() << '\n';
    return io::exit_code(e.code());
  } catch (const std::exception& e) {
    err << io::error_json(Error(ErrorCode::Internal, e.what())).dump() << '\n';
    return 5;
  }
}

}  // namespace meanfield::cli
