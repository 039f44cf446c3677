#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "elcox/parallel.hpp"
#include "elcox/penalty.hpp"
#include "elcox/random.hpp"
#include "elcox/solver.hpp"
#include "elcox/survival.hpp"

namespace elcox {

/// Event-stratified k-fold assignments, optionally repeated.
struct CvPlan {
    int k = 5;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::vector<std::vector<Index>> fold_of;  // per repeat: observation -> fold

    std::vector<Index> train_rows(int repeat, int fold) const {
        std::vector<Index> rows;
        const auto& assignment = fold_of[static_cast<std::size_t>(repeat)];
        for (Index i = 0; i < static_cast<Index>(assignment.size()); ++i)
            if (assignment[static_cast<std::size_t>(i)] != fold) rows.push_back(i);
        return rows;
    }
};

/// Stratified fold assignment: events and censored observations are shuffled
/// separately and dealt round-robin, so fold sizes differ by at most one and
/// every fold receives an event whenever that is possible.
inline CvPlan make_folds(const SurvivalDataset& data, int k, int repeats, std::uint64_t seed) {
    const Index n = data.n_observations();
    if (k < 2 || k > n) throw Error("fold count must satisfy 2 <= k <= n");
    if (repeats < 1) throw Error("repeats must be at least 1");
    if (data.n_events() < k)
        throw TooFewEvents("cannot give every fold an event observation");

    std::vector<Index> event_rows, censored_rows;
    for (Index i = 0; i < n; ++i)
        (data.events()(i) ? event_rows : censored_rows).push_back(i);

    CvPlan plan;
    plan.k = k;
    plan.repeats = repeats;
    plan.seed = seed;
    plan.fold_of.resize(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        Rng rng(child_seed(seed, static_cast<std::uint64_t>(r)));
        auto events = event_rows;
        auto censored = censored_rows;
        rng.shuffle(events);
        rng.shuffle(censored);

        auto& assignment = plan.fold_of[static_cast<std::size_t>(r)];
        assignment.assign(static_cast<std::size_t>(n), 0);
        Index position = 0;
        for (Index row : events) assignment[static_cast<std::size_t>(row)] = position++ % k;
        for (Index row : censored) assignment[static_cast<std::size_t>(row)] = position++ % k;
    }
    return plan;
}

struct CvResult {
    Vector lambdas;
    Vector mean_cv_loglik;
    Vector se_cv_loglik;
    std::vector<bool> valid;
    double best_lambda = 0.0;  // argmax of the mean score; ties keep the larger lambda
    Index best_index = -1;
    double lambda_1se = 0.0;  // largest lambda within one standard error of the maximum
    Index index_1se = -1;
};

/// Cross-validated predictive partial log-likelihood over a descending
/// lambda grid. Each fold contributes l_full(beta_-f) - l_train(beta_-f),
/// fold totals are summed per repeat and averaged across repeats. A
/// non-finite fold score invalidates that lambda instead of aborting.
inline CvResult cv_predictive_loglik(const SurvivalDataset& data, const GroupStructure& groups,
                                     const PenaltySpec& spec_template, const SolverConfig& config,
                                     const CvPlan& plan, const Vector& lambdas, int workers = 1) {
    const Index m = lambdas.size();
    const int tasks = plan.repeats * plan.k;
    std::vector<Vector> fold_scores(static_cast<std::size_t>(tasks));

    parallel_for(tasks, workers, [&](int task) {
        const int repeat = task / plan.k;
        const int fold = task % plan.k;
        const SurvivalDataset train = subset(data, plan.train_rows(repeat, fold));
        const auto path = fit_path<double>(train, groups, spec_template, config, lambdas);
        Vector scores(m);
        for (Index i = 0; i < m; ++i) {
            const Vector& beta = path[static_cast<std::size_t>(i)].beta;
            scores(i) = partial_log_likelihood(data, beta) - partial_log_likelihood(train, beta);
        }
        fold_scores[static_cast<std::size_t>(task)] = std::move(scores);
    });

    CvResult result;
    result.lambdas = lambdas;
    result.mean_cv_loglik = Vector::Zero(m);
    result.se_cv_loglik = Vector::Zero(m);
    result.valid.assign(static_cast<std::size_t>(m), true);

    for (Index i = 0; i < m; ++i) {
        std::vector<double> repeat_totals(static_cast<std::size_t>(plan.repeats), 0.0);
        std::vector<double> contributions;
        bool ok = true;
        for (int task = 0; task < tasks; ++task) {
            const double s = fold_scores[static_cast<std::size_t>(task)](i);
            if (!std::isfinite(s)) ok = false;
            repeat_totals[static_cast<std::size_t>(task / plan.k)] += s;
            contributions.push_back(s);
        }
        result.valid[static_cast<std::size_t>(i)] = ok;
        if (!ok) {
            result.mean_cv_loglik(i) = -std::numeric_limits<double>::infinity();
            continue;
        }
        double mean = 0.0;
        for (double t : repeat_totals) mean += t;
        mean /= plan.repeats;
        result.mean_cv_loglik(i) = mean;

        if (plan.repeats > 1) {
            double ss = 0.0;
            for (double t : repeat_totals) ss += (t - mean) * (t - mean);
            result.se_cv_loglik(i) = std::sqrt(ss / (plan.repeats - 1) / plan.repeats);
        } else {
            // single repeat: spread of the fold contributions around their
            // mean, scaled to the standard error of their sum
            double fold_mean = 0.0;
            for (double c : contributions) fold_mean += c;
            fold_mean /= contributions.size();
            double ss = 0.0;
            for (double c : contributions) ss += (c - fold_mean) * (c - fold_mean);
            const double var = contributions.size() > 1 ? ss / (contributions.size() - 1.0) : 0.0;
            result.se_cv_loglik(i) = std::sqrt(var * static_cast<double>(plan.k));
        }
    }

    // descending grid: the first strict improvement keeps the larger lambda on ties
    for (Index i = 0; i < m; ++i) {
        if (!result.valid[static_cast<std::size_t>(i)]) continue;
        if (result.best_index < 0 ||
            result.mean_cv_loglik(i) > result.mean_cv_loglik(result.best_index)) {
            result.best_index = i;
        }
    }
    if (result.best_index >= 0) {
        result.best_lambda = result.lambdas(result.best_index);
        const double floor_score =
            result.mean_cv_loglik(result.best_index) - result.se_cv_loglik(result.best_index);
        for (Index i = 0; i < m; ++i) {
            if (!result.valid[static_cast<std::size_t>(i)]) continue;
            if (result.mean_cv_loglik(i) >= floor_score) {
                result.index_1se = i;
                result.lambda_1se = result.lambdas(i);
                break;  // grid is descending, first hit is the largest lambda
            }
        }
    }
    return result;
}

/// Penalty factors from per-group mean absolute step-one coefficients:
/// factor_g = m_ref / m_g with m_ref the first positive group mean, so the
/// leading (non-degenerate) group gets factor 1; all-zero groups get the cap.
inline Vector ipf_factors_from_means(const Vector& means, double cap = 1e4) {
    Index ref = -1;
    for (Index g = 0; g < means.size(); ++g) {
        if (means(g) > 0) {
            ref = g;
            break;
        }
    }
    if (ref < 0) throw AllZeroStepOne("every group mean coefficient is zero after step one");
    Vector factors(means.size());
    for (Index g = 0; g < means.size(); ++g)
        factors(g) = means(g) > 0 ? means(ref) / means(g) : cap;
    return factors;
}

struct TwoStepIpfConfig {
    SolverConfig solver;
    PenaltyFamily step1_family = PenaltyFamily::Ridge;  // Lasso also supported
    int k = 5;
    int repeats = 1;
    std::uint64_t seed = 0;
    Index grid_size = 10;
    double grid_min_ratio = 1e-2;
    double zero_group_cap = 1e4;
    int workers = 1;
};

/// Two-step penalty-factor derivation: a CV-tuned step-one fit (Ridge by
/// default), then factors inversely proportional to per-group mean absolute
/// coefficients.
inline Vector two_step_ipf_factors(const SurvivalDataset& data, const GroupStructure& groups,
                                   const TwoStepIpfConfig& config) {
    if (groups.n_groups() < 2) throw Error("two-step factors need at least two groups");
    PenaltySpec step1;
    step1.family = config.step1_family;
    step1.alpha = config.step1_family == PenaltyFamily::Ridge ? 0.0 : 1.0;

    const Vector grid =
        default_lambda_grid(data, groups, step1, config.grid_size, config.grid_min_ratio);
    const CvPlan plan = make_folds(data, config.k, config.repeats, config.seed);
    const CvResult cv =
        cv_predictive_loglik(data, groups, step1, config.solver, plan, grid, config.workers);
    if (cv.best_index < 0) throw Error("step-one cross-validation produced no valid lambda");

    const auto fit = fit_penalized<double>(data, groups, step1.with_lambda(cv.best_lambda),
                                           config.solver);
    Vector means = Vector::Zero(groups.n_groups());
    for (Index g = 0; g < groups.n_groups(); ++g) {
        double sum = 0.0;
        for (Index j : groups.members(g)) sum += std::abs(fit.beta(j));
        means(g) = sum / static_cast<double>(groups.size(g));
    }
    return ipf_factors_from_means(means, config.zero_group_cap);
}

}  // namespace elcox
