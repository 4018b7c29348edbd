#include "meanfield/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace meanfield::io {

namespace {

constexpr const char* kSampleHeader = "# meanfield-lab samples v1";

[[noreturn]] void parse_fail(const std::string& what) { fail(ErrorCode::ConfigParse, what); }

template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    parse_fail(what + ": " + e.what());
  }
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) parse_fail("not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) parse_fail("not a number: '" + s + "'");
  return v;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigParse:
    case ErrorCode::NonSymmetricJ:
    case ErrorCode::BadAlpha:
    case ErrorCode::DegenerateMeasure:
    case ErrorCode::BadMeasure:
    case ErrorCode::NonPositiveDiagonal:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidConfiguration:
    case ErrorCode::NonIntegerSize:
    case ErrorCode::InconsistentRows:
      return 2;
    case ErrorCode::IoError:
      return 4;
    case ErrorCode::Internal:
      return 5;
    default:
      return 3;
  }
}

Json error_json(const Error& e) {
  return {{"error", std::string(e.name())}, {"message", e.what()}, {"exit_code", exit_code(e.code())}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "read error on '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write error on '" + path + "'");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path)); }

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_to_json(m.row(r).transpose()));
  return a;
}

Vector vector_from_json(const Json& j) {
  return guarded("expected an array of numbers", [&] {
    if (!j.is_array()) parse_fail("expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    return v;
  });
}

Matrix matrix_from_json(const Json& j) {
  return guarded("expected a matrix", [&] {
    if (!j.is_array()) parse_fail("expected an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      if (!j.at(r).is_array() || j.at(r).size() != cols) parse_fail("matrix rows have unequal length");
      for (std::size_t c = 0; c < cols; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j.at(r).at(c).get<double>();
    }
    return m;
  });
}

ModelSpec model_from_json(const Json& j) {
  return guarded("invalid model", [&] {
    if (!j.is_object()) parse_fail("model must be a JSON object");
    for (const char* key : {"n", "alpha", "J", "h"})
      if (!j.contains(key)) parse_fail(std::string("model is missing '") + key + "'");
    ModelSpec spec;
    spec.n = j.at("n").get<int>();
    spec.alpha = vector_from_json(j.at("alpha"));
    spec.J = matrix_from_json(j.at("J"));
    spec.h = vector_from_json(j.at("h"));
    if (j.contains("measure")) {
      const Json& atoms = j.at("measure").at("atoms");
      std::vector<Atom> list;
      for (const auto& a : atoms) {
        if (!a.is_array() || a.size() != 2) parse_fail("measure atoms are [location, weight] pairs");
        list.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      }
      spec.site_measure = FiniteMeasure(std::move(list));
    }
    return spec;
  });
}

Json model_to_json(const ModelSpec& spec) {
  Json atoms = Json::array();
  for (const Atom& a : spec.site_measure.atoms()) atoms.push_back({a.location, a.weight});
  return {{"n", spec.n},
          {"alpha", vector_to_json(spec.alpha)},
          {"J", matrix_to_json(spec.J)},
          {"h", vector_to_json(spec.h)},
          {"measure", {{"atoms", atoms}}}};
}

SolverOptions solver_options_from_json(const Json& j) {
  return guarded("invalid solver options", [&] {
    SolverOptions o;
    if (!j.is_object()) parse_fail("solver options must be a JSON object");
    o.grid_points = j.value("grid_points", o.grid_points);
    o.grid_margin = j.value("grid_margin", o.grid_margin);
    o.damping = j.value("damping", o.damping);
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.tolerance = j.value("tolerance", o.tolerance);
    o.dedup_radius = j.value("dedup_radius", o.dedup_radius);
    o.threads = j.value("threads", o.threads);
    if (o.grid_points < 1 || !(o.damping > 0.0 && o.damping <= 1.0) || o.max_iterations < 1 ||
        !(o.tolerance > 0.0) || !(o.dedup_radius > 0.0) || o.threads < 1 ||
        !(o.grid_margin >= 0.0 && o.grid_margin < 0.5))
      parse_fail("solver option out of range");
    return o;
  });
}

Json solver_options_to_json(const SolverOptions& o) {
  return {{"grid_points", o.grid_points}, {"grid_margin", o.grid_margin},
          {"damping", o.damping},         {"max_iterations", o.max_iterations},
          {"tolerance", o.tolerance},     {"dedup_radius", o.dedup_radius},
          {"threads", o.threads}};
}

Json form_to_json(const HomogeneousForm& form) {
  Json terms = Json::array();
  for (const Monomial& m : form.terms())
    terms.push_back({{"exponents", m.exponents}, {"coefficient", m.coefficient}});
  return {{"dimension", form.dimension()}, {"degree", form.degree()}, {"terms", terms}};
}

HomogeneousForm form_from_json(const Json& j) {
  return guarded("invalid form", [&] {
    std::vector<Monomial> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({t.at("exponents").get<std::vector<int>>(), t.at("coefficient").get<double>()});
    return HomogeneousForm(j.at("dimension").get<int>(), j.at("degree").get<int>(), std::move(terms));
  });
}

Json stationary_point_to_json(const StationaryPoint& p) {
  return {{"x", vector_to_json(p.x)},
          {"residual", p.residual},
          {"f", p.f_value},
          {"fbar", optional_number(p.fbar_value)}};
}

Json classification_to_json(const MaximumClassification& c) {
  Json j = stationary_point_to_json(c.point);
  j["k"] = c.k;
  j["strength"] = optional_number(c.strength);
  j["hessian"] = matrix_to_json(c.hessian);
  j["leading_form"] = c.leading_form ? form_to_json(*c.leading_form) : Json(nullptr);
  j["is_global"] = c.is_global;
  return j;
}

Json pressure_to_json(const PressureResult& r) {
  Json points = Json::array();
  for (const auto& p : r.stationary_points) points.push_back(stationary_point_to_json(p));
  Json maxima = Json::array();
  for (const auto& m : r.maxima) maxima.push_back(classification_to_json(m));
  return {{"pressure_limit", r.limit_value},
          {"method_agreement", optional_number(r.method_agreement)},
          {"maxima", maxima},
          {"stationary_points", points}};
}

Json law_to_json(const LimitLaw& law) {
  if (const auto* g = std::get_if<GaussianLaw>(&law)) return {{"kind", "gaussian"}, {"cov", matrix_to_json(g->cov)}};
  if (const auto* h = std::get_if<HigherOrderLaw>(&law))
    return {{"kind", "higher_order"},
            {"k", h->k},
            {"coeffs", form_to_json(h->form)},
            {"log_normalizer", h->log_normalizer}};
  const auto& d = std::get<DeltaMixtureLaw>(law);
  Json points = Json::array();
  for (const auto& p : d.points) points.push_back(vector_to_json(p));
  return {{"kind", "delta_mixture"}, {"points", points}, {"weights", d.weights}};
}

LimitLaw law_from_json(const Json& j) {
  return guarded("invalid law", [&]() -> LimitLaw {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") return GaussianLaw{matrix_from_json(j.at("cov"))};
    if (kind == "higher_order")
      return HigherOrderLaw{j.at("k").get<int>(), form_from_json(j.at("coeffs")),
                            j.at("log_normalizer").get<double>()};
    if (kind == "delta_mixture") {
      DeltaMixtureLaw d;
      for (const auto& p : j.at("points")) d.points.push_back(vector_from_json(p));
      d.weights = j.at("weights").get<std::vector<double>>();
      return d;
    }
    parse_fail("unknown law kind '" + kind + "'");
  });
}

Json estimate_to_json(const InverseEstimate& e) {
  const auto& d = e.diagnostics;
  return {{"J", matrix_to_json(e.J_hat)},
          {"h", vector_to_json(e.h_hat)},
          {"chi", matrix_to_json(e.chi_hat)},
          {"diagnostics",
           {{"chi_condition", d.chi_condition},
            {"min_variance", d.min_variance},
            {"saturation_margin", d.saturation_margin},
            {"rows_used", d.rows_used}}},
          {"log_likelihood", optional_number(e.log_likelihood)}};
}

InverseEstimate estimate_from_json(const Json& j) {
  return guarded("invalid estimate", [&] {
    InverseEstimate e;
    e.J_hat = matrix_from_json(j.at("J"));
    e.h_hat = vector_from_json(j.at("h"));
    e.chi_hat = matrix_from_json(j.at("chi"));
    const Json& d = j.at("diagnostics");
    e.diagnostics.chi_condition = d.at("chi_condition").get<double>();
    e.diagnostics.min_variance = d.at("min_variance").get<double>();
    e.diagnostics.saturation_margin = d.at("saturation_margin").get<double>();
    e.diagnostics.rows_used = d.at("rows_used").get<std::size_t>();
    if (j.contains("log_likelihood") && !j.at("log_likelihood").is_null())
      e.log_likelihood = j.at("log_likelihood").get<double>();
    return e;
  });
}

void write_samples_csv(std::ostream& out, const SampleSet& s) {
  out << kSampleHeader << '\n';
  out << "# n=" << s.n << '\n';
  out << "# N=[";
  for (std::size_t l = 0; l < s.sizes.size(); ++l) out << (l ? "," : "") << s.sizes[l];
  out << "]\n";
  out << "# seed=" << s.seed << '\n';
  out << "# rng=" << kSamplerRng << '\n';
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto r = s.row(i);
    for (std::size_t l = 0; l < r.size(); ++l) out << (l ? "," : "") << r[l];
    out << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kSampleHeader) parse_fail("missing sample file header");
  SampleSet s;
  bool have_n = false;
  bool have_sizes = false;
  bool have_seed = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "n") {
        s.n = static_cast<int>(parse_int(value));
        have_n = true;
      } else if (key == "N") {
        if (value.size() < 2 || value.front() != '[' || value.back() != ']') parse_fail("N must be a bracketed list");
        for (const auto& part : split(value.substr(1, value.size() - 2), ','))
          s.sizes.push_back(static_cast<int>(parse_int(part)));
        have_sizes = true;
      } else if (key == "seed") {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || p != value.data() + value.size()) parse_fail("seed must be an unsigned integer");
        s.seed = v;
        have_seed = true;
      }
      continue;
    }
    if (!have_n || !have_sizes || !have_seed) parse_fail("sample metadata must precede the rows");
    const auto parts = split(line, ',');
    if (static_cast<int>(parts.size()) != s.n)
      fail(ErrorCode::InconsistentRows, "row has " + std::to_string(parts.size()) + " entries, expected " +
                                            std::to_string(s.n));
    for (const auto& p : parts) s.sums.push_back(parse_int(p));
  }
  if (!have_n || !have_sizes || !have_seed) parse_fail("sample metadata incomplete");
  if (static_cast<int>(s.sizes.size()) != s.n) fail(ErrorCode::InconsistentRows, "N list length differs from n");
  return s;
}

void write_discrete_law_csv(std::ostream& out, const DiscreteLaw& law) {
  for (int l = 0; l < law.dim; ++l) out << 'x' << (l + 1) << ',';
  out << "probability\n";
  for (std::size_t i = 0; i < law.size(); ++i) {
    for (int l = 0; l < law.dim; ++l) out << format_double(law.points[i * law.dim + l]) << ',';
    out << format_double(law.probs[i]) << '\n';
  }
}

DiscreteLaw read_discrete_law_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) parse_fail("empty law file");
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || header.back() != "probability") parse_fail("bad law header");
  DiscreteLaw law;
  law.dim = static_cast<int>(header.size()) - 1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != header.size()) parse_fail("law row has the wrong number of fields");
    for (int l = 0; l < law.dim; ++l) law.points.push_back(parse_double(parts[l]));
    law.probs.push_back(parse_double(parts.back()));
  }
  return law;
}

void write_phase_csv(std::ostream& out, const std::vector<PhaseRow>& rows) {
  out << "J,magnetization,pressure,dp_dJ,second_difference\n";
  for (const auto& r : rows) {
    out << format_double(r.J) << ',' << format_double(r.magnetization) << ',' << format_double(r.pressure)
        << ',' << format_double(r.dp_dJ) << ',';
    if (r.second_difference) out << format_double(*r.second_difference);
    out << '\n';
  }
}

}  // namespace meanfield::io
