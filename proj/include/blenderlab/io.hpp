#pragma once

// JSON schemas for the file formats and the report serializers. Parsing
// failures throw SchemaError (CLI exit 2); domain failures inside the
// modules throw Error (exit 3).

#include <string>
#include <vector>

#include <json.hpp>

#include "blenderlab/blender.hpp"
#include "blenderlab/cones.hpp"
#include "blenderlab/entropy.hpp"
#include "blenderlab/local_model.hpp"
#include "blenderlab/spectra.hpp"
#include "blenderlab/unfolding.hpp"

namespace blenderlab::io {

using Json = nlohmann::ordered_json;

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// 17 significant digits, '.' decimal, for lossless CSV round-trips.
std::string format_double(double x);

Eigen::MatrixXd parse_matrix(const Json& j, const std::string& what);
Eigen::VectorXd parse_vector(const Json& j, const std::string& what);
Json matrix_to_json(const Eigen::MatrixXd& M);
Json vector_to_json(const Eigen::VectorXd& v);
Box parse_box(const Json& j, const std::string& what);
Json box_to_json(const Box& b);

// spectra
std::pair<std::vector<std::complex<double>>, int> parse_spectrum(const Json& j);
Json classification_to_json(const spectra::SaddleClassification& c);

// local model
local_model::LocalTangencyModel::Config parse_local_model(const Json& j);
Json strip_to_json(const local_model::Strip& s, double gamma);
Json generic_conditions_to_json(const local_model::GenericConditionsReport& r);

// entropy
entropy::HorseshoeSpec parse_horseshoe(const Json& j);
Json entropy_report_to_json(const entropy::EntropyGapReport& r);

// blender
blender::BlenderSpec parse_blender(const Json& j);
Json witness_to_json(const blender::Witness& w);

// unfolding
unfolding::SweepConfig parse_sweep_axes(const Json& j, int threads);

}  // namespace blenderlab::io
