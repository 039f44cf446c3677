#include "elcox/serialize.hpp"

#include <fstream>

#include "elcox/errors.hpp"

namespace elcox {

Json tool_header(const std::string& command, std::uint64_t seed) {
    Json header;
    header["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    header["command"] = command;
    header["seed"] = seed;
    return header;
}

Json vector_to_json(const Vector& values) {
    Json out = Json::array();
    for (Index i = 0; i < values.size(); ++i) out.push_back(values(i));
    return out;
}

Vector vector_from_json(const Json& values) {
    Vector out(static_cast<Index>(values.size()));
    Index i = 0;
    for (const auto& v : values) out(i++) = v.get<double>();
    return out;
}

Json model_to_json(const FittedModel& model, const std::vector<std::string>& variable_names,
                   const std::vector<std::string>& group_names) {
    Json document;
    document["penalty"] = {{"family", family_name(model.spec.family)},
                           {"lambda", model.spec.lambda},
                           {"alpha", model.spec.alpha}};
    if (model.spec.group_factors.size() > 0)
        document["penalty"]["group_factors"] = vector_to_json(model.spec.group_factors);

    document["fit"] = {{"converged", model.converged},
                       {"sweeps_used", model.sweeps_used},
                       {"final_change", model.final_change},
                       {"objective_trace", model.objective_trace}};

    Json coefficients = Json::object();
    for (Index j = 0; j < model.beta.size(); ++j)
        coefficients[variable_names[static_cast<std::size_t>(j)]] = model.beta(j);
    document["coefficients"] = std::move(coefficients);

    Json groups = Json::object();
    for (Index j = 0; j < model.groups.n_covariates(); ++j)
        groups[variable_names[static_cast<std::size_t>(j)]] =
            group_names[static_cast<std::size_t>(model.groups.group_of(j))];
    document["groups"] = std::move(groups);

    document["baseline_hazard"] = {{"time", vector_to_json(model.baseline.times)},
                                   {"cum_hazard", vector_to_json(model.baseline.cum_hazard)}};
    return document;
}

LoadedModel model_from_json(const Json& document) {
    if (!document.contains("coefficients") || !document.contains("baseline_hazard"))
        throw SchemaError("model document lacks coefficients or baseline_hazard");

    LoadedModel loaded;
    const auto& coefficients = document.at("coefficients");
    loaded.model.beta.resize(static_cast<Index>(coefficients.size()));
    Index j = 0;
    for (const auto& [name, value] : coefficients.items()) {
        loaded.variable_names.push_back(name);
        loaded.model.beta(j++) = value.get<double>();
    }

    const auto& baseline = document.at("baseline_hazard");
    loaded.model.baseline.times = vector_from_json(baseline.at("time"));
    loaded.model.baseline.cum_hazard = vector_from_json(baseline.at("cum_hazard"));

    if (document.contains("groups")) {
        std::vector<Index> ids;
        for (const auto& name : loaded.variable_names) {
            const std::string group = document.at("groups").at(name).get<std::string>();
            auto slot = std::find(loaded.group_names.begin(), loaded.group_names.end(), group);
            if (slot == loaded.group_names.end()) {
                loaded.group_names.push_back(group);
                slot = std::prev(loaded.group_names.end());
            }
            ids.push_back(static_cast<Index>(slot - loaded.group_names.begin()));
        }
        loaded.model.groups = GroupStructure(std::move(ids));
    } else {
        loaded.model.groups = GroupStructure::singletons(loaded.model.beta.size());
    }

    if (document.contains("penalty")) {
        const auto& penalty = document.at("penalty");
        const std::string family = penalty.value("family", "lasso");
        for (PenaltyFamily f :
             {PenaltyFamily::ExclusiveLasso, PenaltyFamily::Lasso, PenaltyFamily::Ridge,
              PenaltyFamily::ElasticNet, PenaltyFamily::GroupLasso, PenaltyFamily::Ipf})
            if (family == family_name(f)) loaded.model.spec.family = f;
        loaded.model.spec.lambda = penalty.value("lambda", 0.0);
        loaded.model.spec.alpha = penalty.value("alpha", 1.0);
        if (penalty.contains("group_factors"))
            loaded.model.spec.group_factors = vector_from_json(penalty.at("group_factors"));
    }
    if (document.contains("fit")) {
        loaded.model.converged = document.at("fit").value("converged", false);
        loaded.model.sweeps_used = document.at("fit").value("sweeps_used", 0);
    }
    return loaded;
}

Json cv_to_json(const CvResult& result) {
    Json document;
    document["lambdas"] = vector_to_json(result.lambdas);
    document["mean_cv_loglik"] = vector_to_json(result.mean_cv_loglik);
    document["se_cv_loglik"] = vector_to_json(result.se_cv_loglik);
    document["valid"] = result.valid;
    document["best_lambda"] = result.best_lambda;
    document["best_index"] = result.best_index;
    document["lambda_1se"] = result.lambda_1se;
    document["index_1se"] = result.index_1se;
    return document;
}

Json truth_to_json(const SimulationScenario& scenario, const SimulatedDataset& sim,
                   const std::vector<std::string>& variable_names,
                   const std::vector<std::string>& group_names) {
    Json document;
    document["scenario"] = {{"n", scenario.n},
                            {"group_sizes", scenario.group_sizes},
                            {"signals_per_group", scenario.signals_per_group},
                            {"within_rho", scenario.within_rho},
                            {"between_rho", scenario.between_rho},
                            {"coef_low", scenario.coef_low},
                            {"coef_high", scenario.coef_high},
                            {"censor_rate", scenario.censor_rate},
                            {"baseline_median", scenario.baseline_median},
                            {"random_signs", scenario.random_signs},
                            {"seed", scenario.seed}};

    Json beta = Json::object();
    for (Index j = 0; j < sim.true_beta.size(); ++j)
        beta[variable_names[static_cast<std::size_t>(j)]] = sim.true_beta(j);
    document["true_beta"] = std::move(beta);

    Json support = Json::array();
    for (Index j : sim.true_support) support.push_back(variable_names[static_cast<std::size_t>(j)]);
    document["true_support"] = std::move(support);

    Json groups = Json::object();
    for (Index j = 0; j < sim.groups.n_covariates(); ++j)
        groups[variable_names[static_cast<std::size_t>(j)]] =
            group_names[static_cast<std::size_t>(sim.groups.group_of(j))];
    document["groups"] = std::move(groups);
    return document;
}

void write_json(const std::string& path, const Json& document) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << document.dump(2) << '\n';
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    Json document;
    try {
        in >> document;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return document;
}

}  // namespace elcox
