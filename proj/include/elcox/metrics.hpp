#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "elcox/errors.hpp"
#include "elcox/solver.hpp"
#include "elcox/survival.hpp"

namespace elcox {

struct SelectionReport {
    Index tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0, f1 = 0.0, fdr = 0.0;
};

/// Confusion counts and derived ratios for support recovery. A coefficient
/// counts as selected iff it is exactly nonzero.
inline SelectionReport selection_metrics(const std::vector<Index>& estimated_support,
                                         const std::vector<Index>& true_support, Index p) {
    std::vector<bool> est(static_cast<std::size_t>(p), false);
    std::vector<bool> truth(static_cast<std::size_t>(p), false);
    for (Index j : estimated_support) {
        if (j < 0 || j >= p) throw IndexOutOfRange("estimated support index out of range");
        est[static_cast<std::size_t>(j)] = true;
    }
    for (Index j : true_support) {
        if (j < 0 || j >= p) throw IndexOutOfRange("true support index out of range");
        truth[static_cast<std::size_t>(j)] = true;
    }

    SelectionReport report;
    for (Index j = 0; j < p; ++j) {
        const bool e = est[static_cast<std::size_t>(j)];
        const bool t = truth[static_cast<std::size_t>(j)];
        if (e && t) ++report.tp;
        else if (e && !t) ++report.fp;
        else if (!e && t) ++report.fn;
        else ++report.tn;
    }
    report.accuracy = static_cast<double>(report.tp + report.tn) / static_cast<double>(p);
    report.fdr = (report.tp + report.fp) > 0
                     ? static_cast<double>(report.fp) / static_cast<double>(report.tp + report.fp)
                     : 0.0;
    const Index f1_denom = 2 * report.tp + report.fp + report.fn;
    report.f1 = f1_denom > 0 ? 2.0 * static_cast<double>(report.tp) / static_cast<double>(f1_denom)
                             : 0.0;
    return report;
}

/// Kaplan-Meier estimate of the censoring distribution (inverted flags).
inline KaplanMeierCurve censoring_distribution(const SurvivalDataset& data) {
    std::vector<double> times(static_cast<std::size_t>(data.n_observations()));
    std::vector<bool> censored(static_cast<std::size_t>(data.n_observations()));
    for (Index i = 0; i < data.n_observations(); ++i) {
        times[static_cast<std::size_t>(i)] = data.times()(i);
        censored[static_cast<std::size_t>(i)] = !data.events()(i);
    }
    return kaplan_meier(times, censored);
}

/// Inverse-probability-of-censoring-weighted squared prediction error at
/// time t. Subjects with an event at or before t weigh against the left
/// limit of the censoring survival at their event time; subjects still at
/// risk weigh against the censoring survival at t; subjects censored by t
/// contribute nothing.
inline double brier_score(const Vector& predictions, const SurvivalDataset& test_data, double t,
                          const KaplanMeierCurve& censor_curve) {
    const Index n = test_data.n_observations();
    if (predictions.size() != n)
        throw DimensionMismatch("one survival prediction per test subject required");
    for (Index i = 0; i < n; ++i)
        if (!(predictions(i) >= 0.0 && predictions(i) <= 1.0))
            throw Error("survival predictions must lie in [0, 1]");

    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double time = test_data.times()(i);
        const bool event = test_data.events()(i);
        if (time <= t && event) {
            const double g = censor_curve.at_left(time);
            if (g <= 0.0) throw ZeroCensorWeight("censoring survival vanished before an event time");
            total += predictions(i) * predictions(i) / g;
        } else if (time > t) {
            const double g = censor_curve.at(t);
            if (g <= 0.0) throw ZeroCensorWeight("censoring survival vanished at the evaluation time");
            const double miss = 1.0 - predictions(i);
            total += miss * miss / g;
        }
    }
    return total / static_cast<double>(n);
}

struct BrierReport {
    Vector eval_times;
    Vector brier_at;
    double ibs = 0.0;
};

/// Distinct event times of the test data up to the horizon; the default
/// integration grid.
inline Vector default_brier_grid(const SurvivalDataset& data, double horizon) {
    std::vector<double> times;
    for (Index i = 0; i < data.n_observations(); ++i)
        if (data.events()(i) && data.times()(i) <= horizon) times.push_back(data.times()(i));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    Vector grid(static_cast<Index>(times.size()));
    for (Index i = 0; i < grid.size(); ++i) grid(i) = times[static_cast<std::size_t>(i)];
    return grid;
}

/// Trapezoidal aggregate of the Brier score over an ascending grid,
/// normalized by the grid span; a single-point grid returns that point's
/// score. survival_probs holds one column per grid time.
inline BrierReport integrated_brier_score(const Matrix& survival_probs,
                                          const SurvivalDataset& test_data, const Vector& grid,
                                          const KaplanMeierCurve& censor_curve) {
    const Index m = grid.size();
    if (m < 1) throw Error("integration grid must contain at least one time");
    for (Index i = 1; i < m; ++i)
        if (!(grid(i) > grid(i - 1))) throw Error("integration grid must be strictly ascending");
    if (survival_probs.rows() != test_data.n_observations() || survival_probs.cols() != m)
        throw DimensionMismatch("survival probability matrix must be n x grid-size");

    BrierReport report;
    report.eval_times = grid;
    report.brier_at.resize(m);
    for (Index i = 0; i < m; ++i)
        report.brier_at(i) = brier_score(survival_probs.col(i), test_data, grid(i), censor_curve);

    if (m == 1) {
        report.ibs = report.brier_at(0);
        return report;
    }
    double area = 0.0;
    for (Index i = 0; i + 1 < m; ++i)
        area += 0.5 * (report.brier_at(i) + report.brier_at(i + 1)) * (grid(i + 1) - grid(i));
    report.ibs = area / (grid(m - 1) - grid(0));
    return report;
}

/// Survival probabilities of a fitted model on test covariates over a grid;
/// the matrix shape integrated_brier_score expects.
inline Matrix survival_matrix(const FittedModel& model, const SurvivalDataset& test_data,
                              const Vector& grid) {
    Matrix out(test_data.n_observations(), grid.size());
    const Vector risk = (test_data.covariates() * model.beta).array().exp();
    for (Index c = 0; c < grid.size(); ++c) {
        const double h0 = model.baseline.cumulative_at(grid(c));
        for (Index i = 0; i < test_data.n_observations(); ++i)
            out(i, c) = std::exp(-h0 * risk(i));
    }
    return out;
}

/// Largest grid horizon with positive censoring weight, so IPCW scores stay
/// defined over the whole grid.
inline double reliable_horizon(const SurvivalDataset& data, const KaplanMeierCurve& censor_curve) {
    double horizon = 0.0;
    for (Index i = 0; i < data.n_observations(); ++i) {
        const double t = data.times()(i);
        if (data.events()(i) && censor_curve.at(t) > 0.0 && censor_curve.at_left(t) > 0.0)
            horizon = std::max(horizon, t);
    }
    return horizon;
}

}  // namespace elcox
