#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "elcox/io.hpp"
#include "elcox/model_selection.hpp"
#include "elcox/simulate.hpp"
#include "elcox/solver.hpp"

namespace elcox {

using Json = nlohmann::ordered_json;

Json tool_header(const std::string& command, std::uint64_t seed);

Json vector_to_json(const Vector& values);
Vector vector_from_json(const Json& values);

/// Full fitted-model document: penalty, convergence diagnostics, named
/// coefficients, baseline hazard table, and group assignment.
Json model_to_json(const FittedModel& model, const std::vector<std::string>& variable_names,
                   const std::vector<std::string>& group_names);

/// Reconstructs the prediction-relevant part of a model document
/// (coefficients by name plus the baseline table).
struct LoadedModel {
    FittedModel model;
    std::vector<std::string> variable_names;
    std::vector<std::string> group_names;
};
LoadedModel model_from_json(const Json& document);

Json cv_to_json(const CvResult& result);

Json truth_to_json(const SimulationScenario& scenario, const SimulatedDataset& sim,
                   const std::vector<std::string>& variable_names,
                   const std::vector<std::string>& group_names);

void write_json(const std::string& path, const Json& document);
Json read_json(const std::string& path);

}  // namespace elcox
