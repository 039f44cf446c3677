#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "elcox/benchmark.hpp"
#include "elcox/errors.hpp"
#include "elcox/io.hpp"
#include "elcox/metrics.hpp"
#include "elcox/model_selection.hpp"
#include "elcox/parallel.hpp"
#include "elcox/random.hpp"
#include "elcox/serialize.hpp"
#include "elcox/simulate.hpp"
#include "elcox/solver.hpp"

using namespace elcox;

namespace {

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const ParseError*>(&error)) return 3;
    if (dynamic_cast<const SchemaError*>(&error)) return 4;
    if (dynamic_cast<const EmptyData*>(&error)) return 5;
    if (dynamic_cast<const RaggedCovariates*>(&error)) return 6;
    if (dynamic_cast<const NonFiniteValue*>(&error)) return 7;
    if (dynamic_cast<const AllCensored*>(&error)) return 8;
    if (dynamic_cast<const DimensionMismatch*>(&error)) return 9;
    if (dynamic_cast<const IndexOutOfRange*>(&error)) return 10;
    if (dynamic_cast<const LengthMismatch*>(&error)) return 11;
    if (dynamic_cast<const NonFiniteObjective*>(&error)) return 12;
    if (dynamic_cast<const TooFewEvents*>(&error)) return 13;
    if (dynamic_cast<const AllZeroStepOne*>(&error)) return 14;
    if (dynamic_cast<const CovarianceNotPD*>(&error)) return 15;
    if (dynamic_cast<const UnknownScenario*>(&error)) return 16;
    if (dynamic_cast<const ZeroCensorWeight*>(&error)) return 17;
    return 1;
}

PenaltyFamily parse_family(const std::string& name) {
    for (PenaltyFamily f : {PenaltyFamily::ExclusiveLasso, PenaltyFamily::Lasso,
                            PenaltyFamily::Ridge, PenaltyFamily::ElasticNet,
                            PenaltyFamily::GroupLasso, PenaltyFamily::Ipf})
        if (name == family_name(f)) return f;
    throw Error("unknown family: " + name +
                " (expected exclusive|lasso|ridge|elastic|group|ipf)");
}

struct SolverFlags {
    double tolerance = 1e-6;
    int max_sweeps = 1000;
    std::string newton_correction = "on";
    double hessian_floor = 1e-8;

    SolverConfig config(double lambda = 0.0) const {
        SolverConfig out;
        out.tolerance = tolerance;
        out.max_sweeps = max_sweeps;
        out.lambda = lambda;
        out.newton_correction = newton_correction != "off";
        out.hessian_floor = hessian_floor;
        return out;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--tolerance", tolerance, "convergence tolerance on the coefficient change");
        cmd->add_option("--max-sweeps", max_sweeps, "sweep budget per fit");
        cmd->add_option("--newton-correction", newton_correction,
                        "include the current-iterate curvature term in updates")
            ->check(CLI::IsMember({"on", "off"}));
        cmd->add_option("--hessian-floor", hessian_floor, "lower clamp for the curvature surrogate");
    }

    Json to_json() const {
        return Json{{"tolerance", tolerance},
                    {"max_sweeps", max_sweeps},
                    {"newton_correction", newton_correction},
                    {"hessian_floor", hessian_floor}};
    }
};

Json input_record(const std::string& path) {
    return Json{{"path", path}, {"fnv1a64", file_digest(path)}};
}

Vector parse_number_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    Vector out(static_cast<Index>(values.size()));
    for (Index i = 0; i < out.size(); ++i) out(i) = values[static_cast<std::size_t>(i)];
    return out;
}

std::vector<Index> parse_index_list(const std::string& text) {
    std::vector<Index> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        values.push_back(static_cast<Index>(std::stoll(item)));
    }
    return values;
}

std::vector<std::string> default_variable_names(Index p) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string data_path, groups_path, out_path = "model.json";
    std::string family = "lasso";
    double lambda = 0.0;
    double alpha = 0.5;
    std::string ipf_factors;
    std::uint64_t seed = 0;
    SolverFlags solver;
};

int cmd_fit(const FitArgs& args) {
    const NamedDataset named = read_survival_csv(args.data_path);
    const NamedGroups groups = read_groups_csv(args.groups_path, named.variable_names);

    PenaltySpec spec;
    spec.family = parse_family(args.family);
    spec.lambda = args.lambda;
    spec.alpha = spec.family == PenaltyFamily::ElasticNet
                     ? args.alpha
                     : (spec.family == PenaltyFamily::Ridge ||
                        spec.family == PenaltyFamily::GroupLasso
                            ? 0.0
                            : 1.0);
    if (!args.ipf_factors.empty()) spec.group_factors = parse_number_list(args.ipf_factors);

    const FittedModel model =
        fit_penalized<double>(named.data, groups.groups, spec, args.solver.config(args.lambda));

    Json document = tool_header("fit", args.seed);
    document["config"] = {{"family", args.family},
                          {"lambda", args.lambda},
                          {"alpha", spec.alpha},
                          {"solver", args.solver.to_json()}};
    document["inputs"] = {{"data", input_record(args.data_path)},
                          {"groups", input_record(args.groups_path)}};
    document.update(model_to_json(model, named.variable_names, groups.group_names));
    write_json(args.out_path, document);
    std::cout << "wrote " << args.out_path << (model.converged ? "" : " (fit did not converge)")
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cv

struct CvArgs {
    std::string data_path, groups_path;
    std::string out_cv = "cv.json", out_model = "model.json";
    std::string family = "lasso";
    double alpha = 0.5;
    int k = 5, repeats = 1;
    Index grid_size = 50;
    double grid_min_ratio = 1e-3;
    std::string cv_rule = "min";
    int ipf_cv_repeats = 10;
    std::uint64_t seed = 0;
    int workers = 1;
    SolverFlags solver;
};

int cmd_cv(const CvArgs& args) {
    const NamedDataset named = read_survival_csv(args.data_path);
    const NamedGroups groups = read_groups_csv(args.groups_path, named.variable_names);

    CvPipelineConfig pipeline;
    pipeline.solver = args.solver.config();
    pipeline.k = args.k;
    pipeline.repeats = args.repeats;
    pipeline.grid_size = args.grid_size;
    pipeline.grid_min_ratio = args.grid_min_ratio;
    pipeline.elastic_alpha = args.alpha;
    pipeline.rule = args.cv_rule == "1se" ? CvRule::OneSe : CvRule::Min;
    pipeline.ipf_cv_repeats = args.ipf_cv_repeats;
    pipeline.workers = args.workers;

    const CvFitResult result =
        cv_fit_family(named.data, groups.groups, parse_family(args.family), pipeline, args.seed);

    Json config = {{"family", args.family}, {"alpha", args.alpha},
                   {"k", args.k},           {"repeats", args.repeats},
                   {"grid_size", args.grid_size}, {"grid_min_ratio", args.grid_min_ratio},
                   {"cv_rule", args.cv_rule},     {"workers", args.workers},
                   {"solver", args.solver.to_json()}};
    Json inputs = {{"data", input_record(args.data_path)},
                   {"groups", input_record(args.groups_path)}};

    Json cv_doc = tool_header("cv", args.seed);
    cv_doc["config"] = config;
    cv_doc["inputs"] = inputs;
    cv_doc.update(cv_to_json(result.cv));
    cv_doc["selected_lambda"] = result.selected_lambda;
    if (result.spec_template.group_factors.size() > 0)
        cv_doc["ipf_factors"] = vector_to_json(result.spec_template.group_factors);
    write_json(args.out_cv, cv_doc);

    Json model_doc = tool_header("cv", args.seed);
    model_doc["config"] = config;
    model_doc["inputs"] = inputs;
    model_doc.update(model_to_json(result.model, named.variable_names, groups.group_names));
    write_json(args.out_model, model_doc);

    std::cout << "best lambda " << result.cv.best_lambda << "; wrote " << args.out_cv << " and "
              << args.out_model << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    int scenario_id = 0;
    int n_signals = 5;
    Index n = 500;
    std::string group_sizes, signals_per_group;
    double within_rho = 0.6, between_rho = 0.3;
    double coef_low = 0.5, coef_high = 1.5;
    double censor_rate = 0.02, baseline_median = 8.0;
    bool all_positive = false;
    std::uint64_t seed = 1;
    std::string out_data = "data.csv", out_truth = "truth.json", out_groups;
};

SimulationScenario scenario_from_args(const SimulateArgs& args) {
    SimulationScenario scenario;
    if (args.scenario_id > 0) {
        scenario = scenario_preset(args.scenario_id, args.n_signals, args.seed);
    } else {
        scenario.n = args.n;
        scenario.group_sizes = parse_index_list(args.group_sizes);
        scenario.signals_per_group = parse_index_list(args.signals_per_group);
        scenario.within_rho = args.within_rho;
        scenario.between_rho = args.between_rho;
        scenario.coef_low = args.coef_low;
        scenario.coef_high = args.coef_high;
        scenario.censor_rate = args.censor_rate;
        scenario.baseline_median = args.baseline_median;
    }
    scenario.seed = args.seed;
    scenario.random_signs = !args.all_positive;
    scenario.validate();
    return scenario;
}

int cmd_simulate(const SimulateArgs& args) {
    const SimulationScenario scenario = scenario_from_args(args);
    const SimulatedDataset sim = generate(scenario);
    const auto names = default_variable_names(scenario.p());
    std::vector<std::string> group_names;
    for (Index g = 0; g < sim.groups.n_groups(); ++g)
        group_names.push_back("g" + std::to_string(g + 1));

    write_survival_csv(args.out_data, sim.dataset, names);
    Json truth = tool_header("simulate", args.seed);
    truth.update(truth_to_json(scenario, sim, names, group_names));
    write_json(args.out_truth, truth);
    if (!args.out_groups.empty())
        write_groups_csv(args.out_groups, names, sim.groups, group_names);

    std::cout << "wrote " << args.out_data << " (" << scenario.n << " x " << scenario.p()
              << ") and " << args.out_truth << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
    SimulateArgs scenario;  // reuses preset/custom scenario flags
    std::string families = "exclusive,lasso";
    int replicates = 1;
    std::uint64_t seed = 1;
    std::string out_results = "results.csv", out_summary = "summary.csv", out_json;
    int k = 5, repeats = 1;
    Index grid_size = 25;
    double grid_min_ratio = 1e-2;
    double alpha = 0.5;
    std::string cv_rule = "1se";
    int ipf_cv_repeats = 10;
    int workers = 1;
    bool quiet = false;
    SolverFlags solver;
};

int cmd_benchmark(const BenchmarkArgs& args) {
    BenchmarkConfig config;
    if (args.scenario.scenario_id > 0) {
        config.scenario_id = args.scenario.scenario_id;
        config.n_signals = args.scenario.n_signals;
    } else {
        config.custom_scenario = scenario_from_args(args.scenario);
    }
    config.families.clear();
    {
        std::stringstream stream(args.families);
        std::string item;
        while (std::getline(stream, item, ','))
            if (!item.empty()) config.families.push_back(parse_family(item));
    }
    config.replicates = args.replicates;
    config.seed = args.seed;
    config.workers = args.workers;
    config.pipeline.solver = args.solver.config();
    config.pipeline.k = args.k;
    config.pipeline.repeats = args.repeats;
    config.pipeline.grid_size = args.grid_size;
    config.pipeline.grid_min_ratio = args.grid_min_ratio;
    config.pipeline.elastic_alpha = args.alpha;
    config.pipeline.rule = args.cv_rule == "min" ? CvRule::Min : CvRule::OneSe;
    config.pipeline.ipf_cv_repeats = args.ipf_cv_repeats;
    config.pipeline.workers = 1;  // replicates already run in parallel

    const auto rows = run_benchmark(config, args.quiet ? nullptr : &std::cerr);

    std::ofstream results(args.out_results);
    if (!results) throw Error("cannot write file: " + args.out_results);
    results << "model,metric,replicate,value\n";
    for (const auto& row : rows) {
        const std::string name = family_name(row.family);
        const std::string rep = std::to_string(row.replicate);
        auto emit = [&](const std::string& metric, const std::string& value) {
            results << name << ',' << metric << ',' << rep << ',' << value << '\n';
        };
        if (row.failed) {
            emit("failed", "1");
            continue;
        }
        if (row.has_selection) {
            emit("accuracy", format_double(row.selection.accuracy));
            emit("f1", format_double(row.selection.f1));
            emit("fdr", format_double(row.selection.fdr));
        }
        emit("ibs", format_double(row.ibs));
        emit("n_selected", std::to_string(row.n_selected));
        emit("best_lambda", format_double(row.best_lambda));
    }
    results.close();

    const auto summary = summarize_benchmark(rows);
    std::ofstream sum(args.out_summary);
    if (!sum) throw Error("cannot write file: " + args.out_summary);
    sum << "family,metric,mean,se,replicates\n";
    for (const auto& row : summary) {
        const std::string prefix = std::string(family_name(row.family)) + ",";
        sum << prefix << "accuracy," << format_double(row.accuracy_mean) << ","
            << format_double(row.accuracy_se) << "," << row.replicates_used << "\n";
        sum << prefix << "f1," << format_double(row.f1_mean) << "," << format_double(row.f1_se)
            << "," << row.replicates_used << "\n";
        sum << prefix << "fdr," << format_double(row.fdr_mean) << "," << format_double(row.fdr_se)
            << "," << row.replicates_used << "\n";
        sum << prefix << "ibs," << format_double(row.ibs_mean) << "," << format_double(row.ibs_se)
            << "," << row.replicates_used << "\n";
    }
    sum.close();

    if (!args.out_json.empty()) {
        Json doc = tool_header("benchmark", args.seed);
        Json rows_json = Json::array();
        for (const auto& row : rows) {
            Json r = {{"replicate", row.replicate},
                      {"family", family_name(row.family)},
                      {"failed", row.failed}};
            if (!row.failed) {
                if (row.has_selection) {
                    r["accuracy"] = row.selection.accuracy;
                    r["f1"] = row.selection.f1;
                    r["fdr"] = row.selection.fdr;
                }
                r["ibs"] = row.ibs;
                r["n_selected"] = row.n_selected;
                r["best_lambda"] = row.best_lambda;
            } else {
                r["error"] = row.error;
            }
            rows_json.push_back(std::move(r));
        }
        doc["results"] = std::move(rows_json);
        write_json(args.out_json, doc);
    }

    std::cout << summary_table(summary);
    return 0;
}

// ---------------------------------------------------------------------------
// path

struct PathArgs {
    std::string data_path, groups_path, out_path = "path.csv";
    std::string family = "lasso";
    double alpha = 0.5;
    Index grid_size = 50;
    double grid_min_ratio = 1e-3;
    std::string lambdas;
    std::string ipf_factors;
    std::uint64_t seed = 0;
    SolverFlags solver;
};

int cmd_path(const PathArgs& args) {
    const NamedDataset named = read_survival_csv(args.data_path);
    const NamedGroups groups = read_groups_csv(args.groups_path, named.variable_names);

    PenaltySpec spec;
    spec.family = parse_family(args.family);
    spec.alpha = spec.family == PenaltyFamily::ElasticNet
                     ? args.alpha
                     : (spec.family == PenaltyFamily::Ridge ||
                        spec.family == PenaltyFamily::GroupLasso
                            ? 0.0
                            : 1.0);
    if (!args.ipf_factors.empty()) spec.group_factors = parse_number_list(args.ipf_factors);

    const Vector grid = args.lambdas.empty()
                            ? default_lambda_grid(named.data, groups.groups, spec, args.grid_size,
                                                  args.grid_min_ratio)
                            : parse_number_list(args.lambdas);
    const auto path = fit_path<double>(named.data, groups.groups, spec, args.solver.config(), grid);

    std::ofstream out(args.out_path);
    if (!out) throw Error("cannot write file: " + args.out_path);
    out << "lambda,variable,coefficient\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (Index j = 0; j < named.data.n_covariates(); ++j)
            out << format_double(grid(static_cast<Index>(i))) << ','
                << named.variable_names[static_cast<std::size_t>(j)] << ','
                << format_double(path[i].beta(j)) << '\n';
    }
    std::cout << "wrote " << args.out_path << " (" << path.size() << " lambdas)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// filter-variance

struct FilterArgs {
    std::string data_path, groups_path, protected_group;
    Index top_k = -1;
    double min_var = -1.0;
    std::string out_data = "filtered.csv", out_groups;
};

int cmd_filter_variance(const FilterArgs& args) {
    const NamedDataset named = read_survival_csv(args.data_path);
    if (args.top_k < 0 && args.min_var < 0)
        throw SchemaError("filter-variance requires --top-k or --min-var");
    if (args.top_k > named.data.n_covariates())
        throw SchemaError("--top-k exceeds the number of covariates");

    std::optional<NamedGroups> groups;
    std::vector<bool> is_protected(named.variable_names.size(), false);
    if (!args.groups_path.empty()) {
        groups = read_groups_csv(args.groups_path, named.variable_names);
        if (!args.protected_group.empty()) {
            const Index gid = groups->id_of(args.protected_group);
            if (gid < 0) throw SchemaError("protected group not found: " + args.protected_group);
            for (Index j = 0; j < named.data.n_covariates(); ++j)
                if (groups->groups.group_of(j) == gid) is_protected[static_cast<std::size_t>(j)] = true;
        }
    } else if (!args.protected_group.empty()) {
        throw SchemaError("--protected requires --groups");
    }

    const Matrix& X = named.data.covariates();
    const Index n = named.data.n_observations();
    Vector variance(named.data.n_covariates());
    for (Index j = 0; j < named.data.n_covariates(); ++j) {
        const double mean = X.col(j).mean();
        variance(j) = n > 1 ? (X.col(j).array() - mean).square().sum() / (n - 1) : 0.0;
    }

    std::vector<Index> candidates;
    for (Index j = 0; j < named.data.n_covariates(); ++j)
        if (!is_protected[static_cast<std::size_t>(j)]) candidates.push_back(j);

    std::vector<Index> kept;
    if (args.top_k >= 0) {
        std::vector<Index> order = candidates;
        // ties broken by column order via stable sort
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return variance(a) > variance(b); });
        const Index protected_count =
            named.data.n_covariates() - static_cast<Index>(candidates.size());
        const Index take = std::min<Index>(std::max<Index>(args.top_k - protected_count, 0),
                                           static_cast<Index>(order.size()));
        kept.assign(order.begin(), order.begin() + take);
    } else {
        for (Index j : candidates)
            if (variance(j) >= args.min_var) kept.push_back(j);
    }
    for (Index j = 0; j < named.data.n_covariates(); ++j)
        if (is_protected[static_cast<std::size_t>(j)]) kept.push_back(j);
    std::sort(kept.begin(), kept.end());

    Matrix filtered(n, static_cast<Index>(kept.size()));
    std::vector<std::string> kept_names;
    for (std::size_t c = 0; c < kept.size(); ++c) {
        filtered.col(static_cast<Index>(c)) = X.col(kept[c]);
        kept_names.push_back(named.variable_names[static_cast<std::size_t>(kept[c])]);
    }
    SurvivalDataset out_data(std::move(filtered), named.data.times(), named.data.events());
    write_survival_csv(args.out_data, out_data, kept_names);

    if (!args.out_groups.empty()) {
        if (!groups) throw SchemaError("--out-groups requires --groups");
        std::vector<Index> ids;
        for (Index j : kept) ids.push_back(groups->groups.group_of(j));
        // compact group ids over the surviving columns
        std::vector<Index> remap(static_cast<std::size_t>(groups->groups.n_groups()), -1);
        std::vector<std::string> kept_group_names;
        for (Index& id : ids) {
            if (remap[static_cast<std::size_t>(id)] < 0) {
                remap[static_cast<std::size_t>(id)] = static_cast<Index>(kept_group_names.size());
                kept_group_names.push_back(groups->group_names[static_cast<std::size_t>(id)]);
            }
            id = remap[static_cast<std::size_t>(id)];
        }
        write_groups_csv(args.out_groups, kept_names, GroupStructure(std::move(ids)),
                         kept_group_names);
    }
    std::cout << "kept " << kept.size() << " of " << named.data.n_covariates() << " variables\n";
    return 0;
}

// ---------------------------------------------------------------------------
// select-frequency

struct FrequencyArgs {
    std::string data_path, groups_path, out_path = "frequency.csv";
    std::string family = "exclusive";
    double fraction = 0.7;
    int repeats = 10;
    int k = 5;
    Index grid_size = 25;
    double grid_min_ratio = 1e-2;
    double alpha = 0.5;
    std::string cv_rule = "1se";
    std::uint64_t seed = 0;
    int workers = 1;
    SolverFlags solver;
};

int cmd_select_frequency(const FrequencyArgs& args) {
    const NamedDataset named = read_survival_csv(args.data_path);
    const NamedGroups groups = read_groups_csv(args.groups_path, named.variable_names);
    if (!(args.fraction > 0.0 && args.fraction < 1.0))
        throw Error("subsample fraction must lie in (0, 1)");
    if (args.repeats < 1) throw Error("repeats must be at least 1");

    CvPipelineConfig pipeline;
    pipeline.solver = args.solver.config();
    pipeline.k = args.k;
    pipeline.grid_size = args.grid_size;
    pipeline.grid_min_ratio = args.grid_min_ratio;
    pipeline.elastic_alpha = args.alpha;
    pipeline.rule = args.cv_rule == "min" ? CvRule::Min : CvRule::OneSe;

    std::vector<Index> event_rows, censored_rows;
    for (Index i = 0; i < named.data.n_observations(); ++i)
        (named.data.events()(i) ? event_rows : censored_rows).push_back(i);

    const PenaltyFamily family = parse_family(args.family);
    std::vector<std::vector<Index>> selections(static_cast<std::size_t>(args.repeats));
    std::vector<char> usable(static_cast<std::size_t>(args.repeats), 0);

    parallel_for(args.repeats, args.workers, [&](int rep) {
        Rng rng(child_seed(args.seed, static_cast<std::uint64_t>(rep)));
        auto events = event_rows;
        auto censored = censored_rows;
        rng.shuffle(events);
        rng.shuffle(censored);
        const auto take_events = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(args.fraction * events.size())));
        const auto take_censored =
            static_cast<std::size_t>(std::llround(args.fraction * censored.size()));
        std::vector<Index> rows(events.begin(),
                                events.begin() + std::min(take_events, events.size()));
        rows.insert(rows.end(), censored.begin(),
                    censored.begin() + std::min(take_censored, censored.size()));
        std::sort(rows.begin(), rows.end());

        const SurvivalDataset train = subset(named.data, rows);
        const auto fit = cv_fit_family(train, groups.groups, family, pipeline,
                                       child_seed(args.seed, 5000 + static_cast<std::uint64_t>(rep)));
        selections[static_cast<std::size_t>(rep)] = fit.model.active_set();
        usable[static_cast<std::size_t>(rep)] = 1;
    });

    std::vector<int> counts(named.variable_names.size(), 0);
    int completed = 0;
    for (int rep = 0; rep < args.repeats; ++rep) {
        if (!usable[static_cast<std::size_t>(rep)]) continue;
        ++completed;
        for (Index j : selections[static_cast<std::size_t>(rep)])
            ++counts[static_cast<std::size_t>(j)];
    }

    std::vector<Index> order(named.variable_names.size());
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    });

    std::ofstream out(args.out_path);
    if (!out) throw Error("cannot write file: " + args.out_path);
    out << "variable,count,frequency\n";
    for (Index j : order)
        out << named.variable_names[static_cast<std::size_t>(j)] << ','
            << counts[static_cast<std::size_t>(j)] << ','
            << format_double(completed > 0
                                 ? static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                                       completed
                                 : 0.0)
            << '\n';
    std::cout << "wrote " << args.out_path << " over " << completed << " subsamples\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model_path, data_path, out_path = "predictions.csv";
    std::string times;
};

int cmd_predict(const PredictArgs& args) {
    const LoadedModel loaded = model_from_json(read_json(args.model_path));
    const NamedDataset named = read_survival_csv(args.data_path);
    if (args.times.empty()) throw SchemaError("predict requires --times t1,t2,...");
    const Vector times = parse_number_list(args.times);

    // match model variables to data columns by name
    std::vector<Index> column_of;
    for (const auto& name : loaded.variable_names) {
        const auto slot = std::find(named.variable_names.begin(), named.variable_names.end(), name);
        if (slot == named.variable_names.end())
            throw SchemaError("data file is missing model variable: " + name);
        column_of.push_back(static_cast<Index>(slot - named.variable_names.begin()));
    }

    std::ofstream out(args.out_path);
    if (!out) throw Error("cannot write file: " + args.out_path);
    out << "row,time,survival\n";
    Vector x(loaded.model.beta.size());
    for (Index i = 0; i < named.data.n_observations(); ++i) {
        for (Index j = 0; j < x.size(); ++j)
            x(j) = named.data.covariates()(i, column_of[static_cast<std::size_t>(j)]);
        for (Index t = 0; t < times.size(); ++t) {
            if (times(t) < 0) throw Error("prediction times must be non-negative");
            out << (i + 1) << ',' << format_double(times(t)) << ','
                << format_double(predict_survival(loaded.model, x, times(t))) << '\n';
        }
    }
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

void attach_scenario_flags(CLI::App* cmd, SimulateArgs& args) {
    cmd->add_option("--scenario", args.scenario_id, "preset scenario id (1, 2, or 3)");
    cmd->add_option("--signals", args.n_signals, "preset signal count (5, 10, or 20)");
    cmd->add_option("--n", args.n, "observations (custom scenario)");
    cmd->add_option("--group-sizes", args.group_sizes, "comma list of group sizes (custom)");
    cmd->add_option("--signals-per-group", args.signals_per_group,
                    "comma list of signal counts (custom)");
    cmd->add_option("--within-rho", args.within_rho, "within-group correlation base");
    cmd->add_option("--between-rho", args.between_rho, "between-group correlation base");
    cmd->add_option("--coef-low", args.coef_low, "coefficient magnitude lower bound");
    cmd->add_option("--coef-high", args.coef_high, "coefficient magnitude upper bound");
    cmd->add_option("--censor-rate", args.censor_rate, "exponential censoring rate");
    cmd->add_option("--baseline-median", args.baseline_median, "baseline median event time");
    cmd->add_flag("--all-positive", args.all_positive, "draw all coefficients positive");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"penalized Cox proportional-hazards toolkit"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit one penalized Cox model");
    fit_cmd->add_option("--data", fit_args.data_path, "survival CSV")->required();
    fit_cmd->add_option("--groups", fit_args.groups_path, "variable,group CSV")->required();
    fit_cmd->add_option("--family", fit_args.family, "penalty family");
    fit_cmd->add_option("--lambda", fit_args.lambda, "penalty strength")->required();
    fit_cmd->add_option("--alpha", fit_args.alpha, "elastic net mixing");
    fit_cmd->add_option("--ipf-factors", fit_args.ipf_factors, "comma list of per-group factors");
    fit_cmd->add_option("--seed", fit_args.seed, "recorded seed");
    fit_cmd->add_option("--out", fit_args.out_path, "model JSON output");
    fit_args.solver.attach(fit_cmd);

    CvArgs cv_args;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validate lambda, then refit");
    cv_cmd->add_option("--data", cv_args.data_path, "survival CSV")->required();
    cv_cmd->add_option("--groups", cv_args.groups_path, "variable,group CSV")->required();
    cv_cmd->add_option("--family", cv_args.family, "penalty family");
    cv_cmd->add_option("--alpha", cv_args.alpha, "elastic net mixing");
    cv_cmd->add_option("--k", cv_args.k, "fold count");
    cv_cmd->add_option("--repeats", cv_args.repeats, "cross-validation repeats");
    cv_cmd->add_option("--grid-size", cv_args.grid_size, "lambda grid size");
    cv_cmd->add_option("--grid-min-ratio", cv_args.grid_min_ratio, "smallest lambda / lambda_max");
    cv_cmd->add_option("--cv-rule", cv_args.cv_rule, "refit lambda rule: min or 1se")
        ->check(CLI::IsMember({"min", "1se"}));
    cv_cmd->add_option("--ipf-cv-repeats", cv_args.ipf_cv_repeats,
                       "repeated lambda CV for the ipf family");
    cv_cmd->add_option("--seed", cv_args.seed, "fold assignment seed");
    cv_cmd->add_option("--workers", cv_args.workers, "worker threads");
    cv_cmd->add_option("--out", cv_args.out_cv, "cv JSON output");
    cv_cmd->add_option("--out-model", cv_args.out_model, "model JSON output");
    cv_args.solver.attach(cv_cmd);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a grouped survival dataset");
    attach_scenario_flags(sim_cmd, sim_args);
    sim_cmd->add_option("--seed", sim_args.seed, "generation seed");
    sim_cmd->add_option("--out", sim_args.out_data, "data CSV output");
    sim_cmd->add_option("--out-truth", sim_args.out_truth, "ground-truth JSON output");
    sim_cmd->add_option("--out-groups", sim_args.out_groups, "groups CSV output");

    BenchmarkArgs bench_args;
    auto* bench_cmd = app.add_subcommand("benchmark", "simulation benchmark across families");
    attach_scenario_flags(bench_cmd, bench_args.scenario);
    bench_cmd->add_option("--families", bench_args.families, "comma list of families");
    bench_cmd->add_option("--replicates", bench_args.replicates, "replicate count");
    bench_cmd->add_option("--seed", bench_args.seed, "master seed");
    bench_cmd->add_option("--k", bench_args.k, "cross-validation folds");
    bench_cmd->add_option("--repeats", bench_args.repeats, "cross-validation repeats");
    bench_cmd->add_option("--grid-size", bench_args.grid_size, "lambda grid size");
    bench_cmd->add_option("--grid-min-ratio", bench_args.grid_min_ratio,
                          "smallest lambda / lambda_max");
    bench_cmd->add_option("--cv-rule", bench_args.cv_rule, "refit lambda rule: min or 1se")
        ->check(CLI::IsMember({"min", "1se"}));
    bench_cmd->add_option("--ipf-cv-repeats", bench_args.ipf_cv_repeats,
                          "repeated lambda CV for the ipf family");
    bench_cmd->add_option("--alpha", bench_args.alpha, "elastic net mixing");
    bench_cmd->add_option("--workers", bench_args.workers, "worker threads");
    bench_cmd->add_option("--out", bench_args.out_results, "long-format results CSV");
    bench_cmd->add_option("--out-summary", bench_args.out_summary, "summary CSV");
    bench_cmd->add_option("--out-json", bench_args.out_json, "results JSON (optional)");
    bench_cmd->add_flag("--quiet", bench_args.quiet, "suppress progress lines");
    bench_args.solver.attach(bench_cmd);

    PathArgs path_args;
    auto* path_cmd = app.add_subcommand("path", "trace a regularization path");
    path_cmd->add_option("--data", path_args.data_path, "survival CSV")->required();
    path_cmd->add_option("--groups", path_args.groups_path, "variable,group CSV")->required();
    path_cmd->add_option("--family", path_args.family, "penalty family");
    path_cmd->add_option("--alpha", path_args.alpha, "elastic net mixing");
    path_cmd->add_option("--grid-size", path_args.grid_size, "lambda grid size");
    path_cmd->add_option("--grid-min-ratio", path_args.grid_min_ratio,
                         "smallest lambda / lambda_max");
    path_cmd->add_option("--lambdas", path_args.lambdas, "explicit comma list (descending)");
    path_cmd->add_option("--ipf-factors", path_args.ipf_factors, "comma list of per-group factors");
    path_cmd->add_option("--seed", path_args.seed, "recorded seed");
    path_cmd->add_option("--out", path_args.out_path, "path CSV output");
    path_args.solver.attach(path_cmd);

    FilterArgs filter_args;
    auto* filter_cmd = app.add_subcommand("filter-variance", "keep high-variance covariates");
    filter_cmd->add_option("--data", filter_args.data_path, "survival CSV")->required();
    filter_cmd->add_option("--groups", filter_args.groups_path, "variable,group CSV");
    filter_cmd->add_option("--protected", filter_args.protected_group,
                           "group name that always survives filtering");
    filter_cmd->add_option("--top-k", filter_args.top_k, "total variables to keep");
    filter_cmd->add_option("--min-var", filter_args.min_var, "minimum sample variance");
    filter_cmd->add_option("--out", filter_args.out_data, "filtered data CSV");
    filter_cmd->add_option("--out-groups", filter_args.out_groups, "filtered groups CSV");

    FrequencyArgs freq_args;
    auto* freq_cmd = app.add_subcommand("select-frequency",
                                        "selection frequency over random subsamples");
    freq_cmd->add_option("--data", freq_args.data_path, "survival CSV")->required();
    freq_cmd->add_option("--groups", freq_args.groups_path, "variable,group CSV")->required();
    freq_cmd->add_option("--family", freq_args.family, "penalty family");
    freq_cmd->add_option("--fraction", freq_args.fraction, "training subsample fraction");
    freq_cmd->add_option("--repeats", freq_args.repeats, "number of subsamples");
    freq_cmd->add_option("--k", freq_args.k, "cross-validation folds");
    freq_cmd->add_option("--grid-size", freq_args.grid_size, "lambda grid size");
    freq_cmd->add_option("--grid-min-ratio", freq_args.grid_min_ratio,
                         "smallest lambda / lambda_max");
    freq_cmd->add_option("--cv-rule", freq_args.cv_rule, "refit lambda rule: min or 1se")
        ->check(CLI::IsMember({"min", "1se"}));
    freq_cmd->add_option("--alpha", freq_args.alpha, "elastic net mixing");
    freq_cmd->add_option("--seed", freq_args.seed, "subsampling seed");
    freq_cmd->add_option("--workers", freq_args.workers, "worker threads");
    freq_cmd->add_option("--out", freq_args.out_path, "frequency CSV output");
    freq_args.solver.attach(freq_cmd);

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "survival probabilities from a model JSON");
    predict_cmd->add_option("--model", predict_args.model_path, "model JSON")->required();
    predict_cmd->add_option("--data", predict_args.data_path, "covariate CSV")->required();
    predict_cmd->add_option("--times", predict_args.times, "comma list of evaluation times")
        ->required();
    predict_cmd->add_option("--out", predict_args.out_path, "predictions CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_args);
        if (cv_cmd->parsed()) return cmd_cv(cv_args);
        if (sim_cmd->parsed()) return cmd_simulate(sim_args);
        if (bench_cmd->parsed()) return cmd_benchmark(bench_args);
        if (path_cmd->parsed()) return cmd_path(path_args);
        if (filter_cmd->parsed()) return cmd_filter_variance(filter_args);
        if (freq_cmd->parsed()) return cmd_select_frequency(freq_args);
        if (predict_cmd->parsed()) return cmd_predict(predict_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 2;
}
