#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "elcox/metrics.hpp"
#include "elcox/model_selection.hpp"
#include "elcox/simulate.hpp"
#include "elcox/solver.hpp"

namespace elcox {

/// Which cross-validated lambda the refit uses: the score maximizer, or the
/// largest lambda within one standard error of it (the sparser conventional
/// choice).
enum class CvRule { Min, OneSe };

inline const char* cv_rule_name(CvRule rule) { return rule == CvRule::Min ? "min" : "1se"; }

/// Settings shared by the cross-validated single fits (cv subcommand,
/// select-frequency) and the simulation benchmark.
struct CvPipelineConfig {
    SolverConfig solver;
    int k = 5;
    int repeats = 1;
    Index grid_size = 50;
    double grid_min_ratio = 1e-3;
    double elastic_alpha = 0.5;
    CvRule rule = CvRule::OneSe;
    int ipf_cv_repeats = 10;  // repeated lambda CV for the IPF family
    Index ipf_step1_grid_size = 10;
    double ipf_zero_group_cap = 1e4;
    int workers = 1;
};

struct CvFitResult {
    PenaltySpec spec_template;  // family with derived factors, lambda unset
    CvResult cv;
    double selected_lambda = 0.0;  // per the configured CvRule
    FittedModel model;             // refit on the full data at selected_lambda
};

/// Builds the family's penalty template (including two-step IPF factors),
/// selects lambda by cross-validated predictive log-likelihood, and refits
/// on the full data.
CvFitResult cv_fit_family(const SurvivalDataset& data, const GroupStructure& groups,
                          PenaltyFamily family, const CvPipelineConfig& config,
                          std::uint64_t seed);

struct BenchmarkConfig {
    int scenario_id = 1;
    int n_signals = 5;
    std::optional<SimulationScenario> custom_scenario;  // overrides the preset when set
    std::vector<PenaltyFamily> families = {PenaltyFamily::ExclusiveLasso, PenaltyFamily::Lasso};
    int replicates = 1;
    std::uint64_t seed = 1;
    CvPipelineConfig pipeline;
    int workers = 1;
};

struct ReplicateResult {
    int replicate = 0;
    PenaltyFamily family = PenaltyFamily::Lasso;
    bool failed = false;
    std::string error;
    bool has_selection = true;  // ridge never produces zeros and is excluded
    SelectionReport selection;
    double ibs = 0.0;
    double best_lambda = 0.0;
    Index n_selected = 0;
};

/// Per replicate: generate a training set and an independent validation set
/// with the same coefficients, CV-fit every family on the training data,
/// and score selection against the ground truth plus IBS on validation.
/// A failed family fit is recorded and skipped, not fatal.
std::vector<ReplicateResult> run_benchmark(const BenchmarkConfig& config,
                                           std::ostream* progress = nullptr);

struct SummaryRow {
    PenaltyFamily family;
    int replicates_used = 0;
    double accuracy_mean = 0, accuracy_se = 0;
    double f1_mean = 0, f1_se = 0;
    double fdr_mean = 0, fdr_se = 0;
    double ibs_mean = 0, ibs_se = 0;
};

std::vector<SummaryRow> summarize_benchmark(const std::vector<ReplicateResult>& rows);

std::string summary_table(const std::vector<SummaryRow>& summary);

}  // namespace elcox
