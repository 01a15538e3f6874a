#pragma once

#include <filesystem>
#include <json.hpp>

#include "statarb/hjb.hpp"
#include "statarb/model.hpp"
#include "statarb/synth.hpp"

namespace statarb {

using Json = nlohmann::json;

/// {"rows", "cols", "data"} with data row-major.
Json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const Json& j, const std::string& what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

Json model_to_json(const ModelParams& p);
/// Rebuilds through make_model, so derived blocks are recomputed and validated.
ModelParams model_from_json(const Json& j);

Json solution_to_json(const HJBSolution& s);

Json synth_to_json(const SynthConfig& c);
SynthConfig synth_from_json(const Json& j);

/// Config plus the implied alpha and beta of the simulated market.
Json truth_json(const SynthConfig& c, const SynthPath& path, const std::vector<std::string>& tickers);

Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace statarb
