#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "elcox/errors.hpp"
#include "elcox/penalty.hpp"
#include "elcox/random.hpp"
#include "elcox/survival.hpp"

namespace elcox {

/// Grouped survival simulation setting: blockwise Toeplitz Gaussian
/// covariates, uniform-magnitude coefficients on randomly placed signals,
/// exponential event times matching a target baseline median, and
/// exponential censoring.
struct SimulationScenario {
    Index n = 500;
    std::vector<Index> group_sizes;
    std::vector<Index> signals_per_group;
    double within_rho = 0.6;
    double between_rho = 0.3;
    double coef_low = 0.5;
    double coef_high = 1.5;
    double censor_rate = 0.02;
    double baseline_median = 8.0;
    std::uint64_t seed = 1;
    bool random_signs = true;  // all-positive coefficients when false

    Index p() const {
        Index total = 0;
        for (Index s : group_sizes) total += s;
        return total;
    }

    double baseline_hazard() const { return std::log(2.0) / baseline_median; }

    void validate() const {
        if (n < 1) throw Error("scenario needs at least one observation");
        if (group_sizes.empty()) throw Error("scenario needs at least one group");
        if (group_sizes.size() != signals_per_group.size())
            throw DimensionMismatch("signals_per_group length must match group_sizes");
        for (std::size_t g = 0; g < group_sizes.size(); ++g) {
            if (group_sizes[g] < 1) throw Error("group sizes must be positive");
            if (signals_per_group[g] < 0 || signals_per_group[g] > group_sizes[g])
                throw Error("signals_per_group must lie within the group size");
        }
        if (!(0.0 <= between_rho && between_rho <= within_rho && within_rho < 1.0))
            throw Error("correlations must satisfy 0 <= between <= within < 1");
        if (!(coef_low <= coef_high) || coef_low < 0)
            throw Error("coefficient range must satisfy 0 <= low <= high");
        if (!(censor_rate > 0)) throw Error("censoring rate must be positive");
        if (!(baseline_median > 0)) throw Error("baseline median must be positive");
    }

    GroupStructure groups() const {
        std::vector<Index> ids;
        ids.reserve(static_cast<std::size_t>(p()));
        for (std::size_t g = 0; g < group_sizes.size(); ++g)
            for (Index i = 0; i < group_sizes[g]; ++i) ids.push_back(static_cast<Index>(g));
        return GroupStructure(std::move(ids));
    }
};

/// The three benchmark scenarios (n = 500, p = 500, five groups) with their
/// per-group signal allocations for 5, 10, or 20 signal variables.
inline SimulationScenario scenario_preset(int scenario_id, int n_signals, std::uint64_t seed = 1) {
    SimulationScenario scenario;
    scenario.seed = seed;
    switch (scenario_id) {
        case 1:
            scenario.group_sizes = {100, 100, 100, 100, 100};
            switch (n_signals) {
                case 5: scenario.signals_per_group = {1, 1, 1, 1, 1}; break;
                case 10: scenario.signals_per_group = {2, 2, 2, 2, 2}; break;
                case 20: scenario.signals_per_group = {4, 4, 4, 4, 4}; break;
                default: throw UnknownScenario("signal count must be 5, 10, or 20");
            }
            break;
        case 2:
            scenario.group_sizes = {15, 20, 85, 180, 200};
            switch (n_signals) {
                case 5: scenario.signals_per_group = {1, 1, 1, 1, 1}; break;
                case 10: scenario.signals_per_group = {1, 2, 1, 4, 2}; break;
                case 20: scenario.signals_per_group = {2, 2, 1, 10, 5}; break;
                default: throw UnknownScenario("signal count must be 5, 10, or 20");
            }
            break;
        case 3:
            scenario.group_sizes = {5, 295, 10, 90, 100};
            switch (n_signals) {
                case 5: scenario.signals_per_group = {1, 1, 1, 1, 1}; break;
                case 10: scenario.signals_per_group = {1, 2, 1, 2, 4}; break;
                case 20: scenario.signals_per_group = {2, 6, 4, 6, 2}; break;
                default: throw UnknownScenario("signal count must be 5, 10, or 20");
            }
            break;
        default:
            throw UnknownScenario("scenario id must be 1, 2, or 3");
    }
    return scenario;
}

/// Blockwise Toeplitz covariance: within_rho^|i-j| inside a group,
/// between_rho^|i-j| across groups, with global column indices.
inline Matrix scenario_covariance(const SimulationScenario& scenario) {
    scenario.validate();
    const Index p = scenario.p();
    std::vector<Index> gid;
    gid.reserve(static_cast<std::size_t>(p));
    for (std::size_t g = 0; g < scenario.group_sizes.size(); ++g)
        for (Index i = 0; i < scenario.group_sizes[g]; ++i) gid.push_back(static_cast<Index>(g));

    Matrix sigma(p, p);
    for (Index i = 0; i < p; ++i) {
        sigma(i, i) = 1.0;
        for (Index j = 0; j < i; ++j) {
            const double rho = gid[static_cast<std::size_t>(i)] == gid[static_cast<std::size_t>(j)]
                                   ? scenario.within_rho
                                   : scenario.between_rho;
            const double value = std::pow(rho, static_cast<double>(i - j));
            sigma(i, j) = value;
            sigma(j, i) = value;
        }
    }
    return sigma;
}

struct SimulatedDataset {
    SurvivalDataset dataset;
    Vector true_beta;
    std::vector<Index> true_support;
    GroupStructure groups;
};

namespace detail {

inline Matrix covariance_cholesky(const SimulationScenario& scenario) {
    const Matrix sigma = scenario_covariance(scenario);
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw CovarianceNotPD("scenario covariance matrix is not positive definite");
    return llt.matrixL();
}

/// X, times and events for a fixed coefficient vector. Draw order: all of X
/// row by row, then per subject one uniform for the event time and one
/// exponential for censoring.
inline SurvivalDataset sample_outcomes(const SimulationScenario& scenario, const Matrix& chol_lower,
                                       const Vector& beta, Rng& rng) {
    const Index n = scenario.n;
    const Index p = scenario.p();
    Matrix Z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
    Matrix X = Z * chol_lower.transpose();

    const double h0 = scenario.baseline_hazard();
    const Vector eta = X * beta;
    Vector time(n);
    BoolArray event(n);
    for (Index i = 0; i < n; ++i) {
        const double event_time = rng.exponential(h0 * std::exp(eta(i)));
        const double censor_time = rng.exponential(scenario.censor_rate);
        time(i) = std::min(event_time, censor_time);
        event(i) = event_time <= censor_time;
    }
    return SurvivalDataset(std::move(X), std::move(time), std::move(event));
}

}  // namespace detail

/// Draws a full simulated dataset: signal positions and coefficients first,
/// then covariates and outcomes. Deterministic given scenario.seed.
inline SimulatedDataset generate(const SimulationScenario& scenario) {
    scenario.validate();
    const Index p = scenario.p();
    const Matrix chol = detail::covariance_cholesky(scenario);
    GroupStructure groups = scenario.groups();
    Rng rng(scenario.seed);

    std::vector<Index> support;
    for (Index g = 0; g < groups.n_groups(); ++g) {
        std::vector<Index> pool = groups.members(g);
        const Index want = scenario.signals_per_group[static_cast<std::size_t>(g)];
        for (Index pick = 0; pick < want; ++pick) {
            const std::size_t swap_with =
                static_cast<std::size_t>(pick) + rng.below(pool.size() - static_cast<std::size_t>(pick));
            std::swap(pool[static_cast<std::size_t>(pick)], pool[swap_with]);
            support.push_back(pool[static_cast<std::size_t>(pick)]);
        }
    }
    std::sort(support.begin(), support.end());

    Vector beta = Vector::Zero(p);
    for (Index j : support) {
        const double magnitude = rng.uniform(scenario.coef_low, scenario.coef_high);
        const double sign = scenario.random_signs ? (rng.uniform() < 0.5 ? 1.0 : -1.0) : 1.0;
        beta(j) = sign * magnitude;
    }

    SimulatedDataset out{detail::sample_outcomes(scenario, chol, beta, rng), std::move(beta),
                         std::move(support), std::move(groups)};
    return out;
}

/// Fresh covariates and outcomes under a fixed coefficient vector, e.g. an
/// independent validation set for an already generated replicate.
inline SurvivalDataset generate_outcomes(const SimulationScenario& scenario, const Vector& true_beta,
                                         std::uint64_t seed) {
    scenario.validate();
    if (true_beta.size() != scenario.p())
        throw DimensionMismatch("coefficient vector length does not match scenario dimension");
    const Matrix chol = detail::covariance_cholesky(scenario);
    Rng rng(seed);
    return detail::sample_outcomes(scenario, chol, true_beta, rng);
}

}  // namespace elcox
