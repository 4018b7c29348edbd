// Config parsing and result serialization: JSON for structured results,
// CSV for samples, laws and scans.
#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "meanfield/error.hpp"
#include "meanfield/exact.hpp"
#include "meanfield/forward.hpp"
#include "meanfield/inverse.hpp"
#include "meanfield/limits.hpp"
#include "meanfield/model.hpp"

namespace meanfield::io {

using Json = nlohmann::json;

/// 17 significant digits.
std::string format_double(double v);

/// Process exit code for an error: 2 config/validation, 3 numeric
/// precondition, 4 io, 5 internal.
int exit_code(ErrorCode code);
Json error_json(const Error& e);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);

ModelSpec model_from_json(const Json& j);
Json model_to_json(const ModelSpec& spec);

SolverOptions solver_options_from_json(const Json& j);
Json solver_options_to_json(const SolverOptions& opts);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);

Json form_to_json(const HomogeneousForm& form);
HomogeneousForm form_from_json(const Json& j);

Json stationary_point_to_json(const StationaryPoint& p);
Json classification_to_json(const MaximumClassification& c);
Json pressure_to_json(const PressureResult& r);

Json law_to_json(const LimitLaw& law);
LimitLaw law_from_json(const Json& j);

Json estimate_to_json(const InverseEstimate& e);
InverseEstimate estimate_from_json(const Json& j);

void write_samples_csv(std::ostream& out, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& in);

/// One row per atom: coordinates then probability.
void write_discrete_law_csv(std::ostream& out, const DiscreteLaw& law);
DiscreteLaw read_discrete_law_csv(std::istream& in);

void write_phase_csv(std::ostream& out, const std::vector<PhaseRow>& rows);

}  // namespace meanfield::io
