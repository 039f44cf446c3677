#include "elcox/benchmark.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "elcox/parallel.hpp"
#include "elcox/random.hpp"

namespace elcox {

CvFitResult cv_fit_family(const SurvivalDataset& data, const GroupStructure& groups,
                          PenaltyFamily family, const CvPipelineConfig& config,
                          std::uint64_t seed) {
    PenaltySpec spec;
    spec.family = family;
    switch (family) {
        case PenaltyFamily::Ridge:
        case PenaltyFamily::GroupLasso:
            spec.alpha = 0.0;
            break;
        case PenaltyFamily::ElasticNet:
            spec.alpha = config.elastic_alpha;
            break;
        default:
            spec.alpha = 1.0;
            break;
    }
    if (family == PenaltyFamily::Ipf) {
        TwoStepIpfConfig step;
        step.solver = config.solver;
        step.k = config.k;
        step.repeats = config.repeats;
        step.seed = child_seed(seed, 101);
        step.grid_size = config.ipf_step1_grid_size;
        step.zero_group_cap = config.ipf_zero_group_cap;
        step.workers = config.workers;
        spec.group_factors = two_step_ipf_factors(data, groups, step);
    }

    const Vector grid =
        default_lambda_grid(data, groups, spec, config.grid_size, config.grid_min_ratio);
    const int repeats =
        family == PenaltyFamily::Ipf ? std::max(config.repeats, config.ipf_cv_repeats) : config.repeats;
    const CvPlan plan = make_folds(data, config.k, repeats, child_seed(seed, 7));
    CvFitResult result;
    result.spec_template = spec;
    result.cv = cv_predictive_loglik(data, groups, spec, config.solver, plan, grid, config.workers);
    if (result.cv.best_index < 0) throw Error("cross-validation produced no valid lambda");
    const Index selected_index = (config.rule == CvRule::OneSe && result.cv.index_1se >= 0)
                                     ? result.cv.index_1se
                                     : result.cv.best_index;
    result.selected_lambda = grid(selected_index);
    // Refit on the full data the same way the folds were fit: warm-started
    // down the grid to the selected lambda. A cold restart can sit at a
    // different point of the sweep budget when the problem is barely
    // penalized (dense group-lasso fits especially).
    auto path = fit_path<double>(data, groups, spec, config.solver,
                                 grid.head(selected_index + 1));
    result.model = std::move(path.back());
    return result;
}

std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& config, std::ostream* progress) {
    if (config.replicates < 1) throw Error("benchmark needs at least one replicate");
    if (config.families.empty()) throw Error("benchmark needs at least one family");

    const std::size_t per_replicate = config.families.size();
    std::vector<ReplicateResult> rows(static_cast<std::size_t>(config.replicates) * per_replicate);

    parallel_for(config.replicates, config.workers, [&](int rep) {
        SimulationScenario scenario = config.custom_scenario
                                          ? *config.custom_scenario
                                          : scenario_preset(config.scenario_id, config.n_signals);
        scenario.seed = child_seed(config.seed, static_cast<std::uint64_t>(2 * rep));
        const SimulatedDataset sim = generate(scenario);
        const SurvivalDataset validation = generate_outcomes(
            scenario, sim.true_beta, child_seed(config.seed, static_cast<std::uint64_t>(2 * rep + 1)));

        const KaplanMeierCurve censor = censoring_distribution(validation);
        const double horizon = reliable_horizon(validation, censor);
        const Vector brier_grid = default_brier_grid(validation, horizon);

        for (std::size_t f = 0; f < per_replicate; ++f) {
            ReplicateResult& row = rows[static_cast<std::size_t>(rep) * per_replicate + f];
            row.replicate = rep;
            row.family = config.families[f];
            try {
                const auto fit =
                    cv_fit_family(sim.dataset, sim.groups, row.family, config.pipeline,
                                  child_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep)));
                row.best_lambda = fit.selected_lambda;

                const auto estimated = fit.model.active_set();
                row.n_selected = static_cast<Index>(estimated.size());
                row.has_selection = row.family != PenaltyFamily::Ridge;
                if (row.has_selection)
                    row.selection = selection_metrics(estimated, sim.true_support,
                                                      sim.dataset.n_covariates());

                const Matrix surv = survival_matrix(fit.model, validation, brier_grid);
                row.ibs = integrated_brier_score(surv, validation, brier_grid, censor).ibs;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            if (progress) {
                (*progress) << "replicate " << rep << " family " << family_name(row.family)
                            << (row.failed ? std::string(" FAILED: ") + row.error
                                           : std::string(" done"))
                            << "\n";
            }
        }
    });
    return rows;
}

namespace {

struct Running {
    double sum = 0, sum_sq = 0;
    int count = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    double mean() const { return count > 0 ? sum / count : 0.0; }
    double se() const {
        if (count < 2) return 0.0;
        const double m = mean();
        const double var = (sum_sq - count * m * m) / (count - 1);
        return std::sqrt(std::max(0.0, var) / count);
    }
};

}  // namespace

std::vector<SummaryRow> summarize_benchmark(const std::vector<ReplicateResult>& rows) {
    std::vector<PenaltyFamily> families;
    for (const auto& row : rows)
        if (std::find(families.begin(), families.end(), row.family) == families.end())
            families.push_back(row.family);

    std::vector<SummaryRow> summary;
    for (PenaltyFamily family : families) {
        SummaryRow out;
        out.family = family;
        Running acc, f1, fdr, ibs;
        for (const auto& row : rows) {
            if (row.family != family || row.failed) continue;
            ++out.replicates_used;
            if (row.has_selection) {
                acc.add(row.selection.accuracy);
                f1.add(row.selection.f1);
                fdr.add(row.selection.fdr);
            }
            ibs.add(row.ibs);
        }
        out.accuracy_mean = acc.mean();
        out.accuracy_se = acc.se();
        out.f1_mean = f1.mean();
        out.f1_se = f1.se();
        out.fdr_mean = fdr.mean();
        out.fdr_se = fdr.se();
        out.ibs_mean = ibs.mean();
        out.ibs_se = ibs.se();
        summary.push_back(out);
    }
    return summary;
}

std::string summary_table(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "family" << std::right << std::setw(8) << "reps"
        << std::setw(16) << "accuracy" << std::setw(16) << "f1" << std::setw(16) << "fdr"
        << std::setw(16) << "ibs" << "\n";
    for (const auto& row : summary) {
        auto cell = [](double mean, double se) {
            std::ostringstream s;
            s << std::fixed << std::setprecision(3) << mean << " (" << se << ")";
            return s.str();
        };
        out << std::left << std::setw(12) << family_name(row.family) << std::right << std::setw(8)
            << row.replicates_used << std::setw(16) << cell(row.accuracy_mean, row.accuracy_se)
            << std::setw(16) << cell(row.f1_mean, row.f1_se) << std::setw(16)
            << cell(row.fdr_mean, row.fdr_se) << std::setw(16) << cell(row.ibs_mean, row.ibs_se)
            << "\n";
    }
    return out.str();
}

}  // namespace elcox
