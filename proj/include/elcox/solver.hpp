#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "elcox/errors.hpp"
#include "elcox/penalty.hpp"
#include "elcox/survival.hpp"

namespace elcox {

/// S(z, t) = sign(z) * max(|z| - t, 0).
template <class Scalar>
Scalar soft_threshold(Scalar z, Scalar threshold) {
    if (z > threshold) return z - threshold;
    if (z < -threshold) return z + threshold;
    return Scalar(0);
}

struct SolverConfig {
    double tolerance = 1e-6;  // stop when the per-sweep coefficient change (L2) falls below
    int max_sweeps = 1000;
    double lambda = 0.0;  // used by fit_exclusive_lasso; fit_penalized reads PenaltySpec::lambda
    bool newton_correction = true;  // include the current-iterate curvature term in the update numerator
    double hessian_floor = 1e-8;

    void validate() const {
        if (!(tolerance > 0)) throw Error("tolerance must be positive");
        if (max_sweeps < 1) throw Error("max_sweeps must be at least 1");
        if (lambda < 0) throw Error("lambda must be non-negative");
        if (!(hessian_floor > 0)) throw Error("hessian_floor must be positive");
    }
};

template <class Scalar>
struct FittedModelT {
    VectorT<Scalar> beta;
    bool converged = false;
    int sweeps_used = 0;
    Scalar final_change = Scalar(0);
    std::vector<Scalar> objective_trace;  // -loglik + lambda * P(beta); entry 0 is the start point
    BaselineHazardTableT<Scalar> baseline;
    PenaltySpec spec;
    GroupStructure groups = GroupStructure::singletons(1);

    std::vector<Index> active_set() const {
        std::vector<Index> out;
        for (Index j = 0; j < beta.size(); ++j)
            if (beta(j) != Scalar(0)) out.push_back(j);
        return out;
    }
};

using FittedModel = FittedModelT<double>;

/// Survival prediction under a fitted model's baseline and coefficients.
template <class Scalar, class DerivedX>
Scalar predict_survival(const FittedModelT<Scalar>& model,
                        const Eigen::MatrixBase<DerivedX>& covariates, Scalar t) {
    return predict_survival(model.baseline, model.beta, covariates, t);
}

namespace detail {

/// Coordinate-descent state shared by all penalty families. Keeps the sorted
/// linear predictor in sync with beta and caches exp weights plus their
/// suffix sums; the cache is rebuilt lazily after any coefficient moves.
template <class Scalar>
class CoxCdEngine {
  public:
    CoxCdEngine(const SurvivalDatasetT<Scalar>& data, const GroupStructure& groups,
                const PenaltySpec& spec, const SolverConfig& config, VectorT<Scalar> beta0)
        : data_(data),
          groups_(groups),
          spec_(spec),
          config_(config),
          n_(data.n_observations()),
          p_(data.n_covariates()),
          beta_(std::move(beta0)),
          lambda_(Scalar(spec.lambda)) {
        check_beta(data_, beta_);
        if (groups_.n_covariates() != p_)
            throw DimensionMismatch("group structure does not match covariate count");
        spec_.validate(groups_);
        config_.validate();

        hdiag_ = hessian_diag(data_);
        for (Index j = 0; j < p_; ++j)
            hdiag_(j) = std::max(hdiag_(j), Scalar(config_.hessian_floor));
        eta_ = data_.covariates_sorted() * beta_;
        weights_.resize(n_);
        suffix_.resize(n_ + 1);
        inv_suffix_.resize(n_);
        group_abs_.assign(static_cast<std::size_t>(groups_.n_groups()), Scalar(0));
        weights_dirty_ = true;
    }

    FittedModelT<Scalar> run() {
        FittedModelT<Scalar> model;
        model.spec = spec_;
        model.groups = groups_;
        const Scalar start_obj = objective();
        if (!std::isfinite(static_cast<double>(start_obj)))
            throw NonFiniteObjective("penalized objective is non-finite at the start point");
        model.objective_trace.push_back(start_obj);

        // Full sweeps alternate with sweeps restricted to the current active
        // set; convergence is declared only on a full sweep's change.
        Scalar change = std::numeric_limits<Scalar>::infinity();
        int sweeps = 0;
        bool converged = false;
        bool active_only = false;
        while (sweeps < config_.max_sweeps) {
            const VectorT<Scalar> beta_prev = beta_;
            rebuild_group_abs();
            if (spec_.family == PenaltyFamily::GroupLasso) {
                group_sweep(active_only);
            } else {
                coordinate_sweep(active_only);
            }
            ++sweeps;
            resync();
            change = (beta_ - beta_prev).norm();
            const Scalar obj = objective();
            model.objective_trace.push_back(obj);
            if (!std::isfinite(static_cast<double>(obj)))
                throw NonFiniteObjective("penalized objective became non-finite");
            if (change <= Scalar(config_.tolerance)) {
                if (!active_only) {
                    converged = true;
                    break;
                }
                active_only = false;  // active set settled; verify with a full sweep
            } else {
                active_only = true;
            }
        }

        model.beta = beta_;
        model.converged = converged;
        model.sweeps_used = sweeps;
        model.final_change = change;
        model.baseline = breslow_baseline(data_, beta_);
        return model;
    }

  private:
    void rebuild_group_abs() {
        std::fill(group_abs_.begin(), group_abs_.end(), Scalar(0));
        for (Index j = 0; j < p_; ++j)
            group_abs_[static_cast<std::size_t>(groups_.group_of(j))] += std::abs(beta_(j));
    }

    // Recompute eta from scratch once per sweep so incremental updates cannot drift.
    void resync() {
        eta_ = data_.covariates_sorted() * beta_;
        weights_dirty_ = true;
    }

    void refresh_weights() {
        if (!weights_dirty_) return;
        shift_ = eta_.maxCoeff();
        weights_ = (eta_.array() - shift_).exp().matrix();
        suffix_(n_) = Scalar(0);
        for (Index k = n_ - 1; k >= 0; --k) suffix_(k) = suffix_(k + 1) + weights_(k);
        // reciprocals hoisted out of the per-coordinate passes
        for (Index k = 0; k < n_; ++k) inv_suffix_(k) = Scalar(1) / suffix_(k);
        weights_dirty_ = false;
    }

    // Score component for covariate j at the current eta (weights must be fresh).
    Scalar grad_component(Index j) const {
        const auto& starts = data_.risk_set_starts();
        const auto& event = data_.events_sorted();
        const Scalar* col = data_.covariates_sorted().col(j).data();
        const Scalar* w = weights_.data();

        Scalar numer = Scalar(0);
        Scalar grad = Scalar(0);
        Scalar block_x = Scalar(0);
        Index block_events = 0;
        for (Index k = n_ - 1; k >= 0; --k) {
            numer += col[k] * w[k];
            if (event(k)) {
                block_x += col[k];
                ++block_events;
            }
            if (starts[static_cast<std::size_t>(k)] == k && block_events > 0) {
                grad += block_x - Scalar(block_events) * numer * inv_suffix_(k);
                block_x = Scalar(0);
                block_events = 0;
            }
        }
        return grad;
    }

    void apply_update(Index j, Scalar bnew) {
        const Scalar bold = beta_(j);
        if (bnew == bold) return;
        eta_ += (bnew - bold) * data_.covariates_sorted().col(j);
        weights_dirty_ = true;
        group_abs_[static_cast<std::size_t>(groups_.group_of(j))] +=
            std::abs(bnew) - std::abs(bold);
        beta_(j) = bnew;
    }

    void coordinate_sweep(bool active_only) {
        for (Index g = 0; g < groups_.n_groups(); ++g) {
            for (Index j : groups_.members(g)) {
                if (active_only && beta_(j) == Scalar(0)) continue;
                refresh_weights();
                const Scalar r = grad_component(j);
                const Scalar bj = beta_(j);
                const Scalar hj = hdiag_(j);

                Scalar threshold = Scalar(0);
                Scalar denom = hj;
                switch (spec_.family) {
                    case PenaltyFamily::ExclusiveLasso:
                        threshold = lambda_ * std::max(Scalar(0), group_abs_[static_cast<std::size_t>(g)] - std::abs(bj));
                        denom = hj + lambda_;
                        break;
                    case PenaltyFamily::Lasso:
                        threshold = lambda_;
                        break;
                    case PenaltyFamily::Ridge:
                        denom = hj + lambda_;
                        break;
                    case PenaltyFamily::ElasticNet:
                        threshold = lambda_ * Scalar(spec_.alpha);
                        denom = hj + lambda_ * (Scalar(1) - Scalar(spec_.alpha));
                        break;
                    case PenaltyFamily::Ipf:
                        threshold = lambda_ * Scalar(spec_.factor(g));
                        break;
                    case PenaltyFamily::GroupLasso:
                        break;  // handled by group_sweep
                }

                const Scalar numer = r + (config_.newton_correction ? hj * bj : Scalar(0));
                if (!std::isfinite(static_cast<double>(numer)))
                    throw NonFiniteObjective("coordinate update became non-finite");
                apply_update(j, soft_threshold(numer, threshold) / denom);
            }
        }
    }

    // Block proximal update per group: quadratic model with the block's
    // largest curvature surrogate, then the group-wise vector soft threshold.
    void group_sweep(bool active_only) {
        for (Index g = 0; g < groups_.n_groups(); ++g) {
            if (active_only && group_abs_[static_cast<std::size_t>(g)] == Scalar(0)) continue;
            refresh_weights();
            const auto& members = groups_.members(g);
            const Index m = static_cast<Index>(members.size());

            VectorT<Scalar> r(m);
            Scalar step = Scalar(0);
            for (Index i = 0; i < m; ++i) {
                r(i) = grad_component(members[static_cast<std::size_t>(i)]);
                step = std::max(step, hdiag_(members[static_cast<std::size_t>(i)]));
            }
            step += lambda_;

            VectorT<Scalar> z = r / step;
            if (config_.newton_correction)
                for (Index i = 0; i < m; ++i) z(i) += beta_(members[static_cast<std::size_t>(i)]);

            const Scalar znorm = z.norm();
            if (!std::isfinite(static_cast<double>(znorm)))
                throw NonFiniteObjective("block update became non-finite");
            const Scalar level = lambda_ * std::sqrt(Scalar(m)) / step;
            const Scalar scale = (znorm > level) ? (Scalar(1) - level / znorm) : Scalar(0);
            for (Index i = 0; i < m; ++i)
                apply_update(members[static_cast<std::size_t>(i)], scale * z(i));
        }
    }

    Scalar objective() {
        refresh_weights();
        const Scalar loglik = partial_log_likelihood_sorted(data_, eta_);
        return -loglik + lambda_ * penalty_value(spec_, groups_, beta_);
    }

    const SurvivalDatasetT<Scalar>& data_;
    GroupStructure groups_;
    PenaltySpec spec_;
    SolverConfig config_;
    Index n_, p_;
    VectorT<Scalar> beta_;
    Scalar lambda_;
    VectorT<Scalar> hdiag_;
    VectorT<Scalar> eta_;
    VectorT<Scalar> weights_;
    VectorT<Scalar> suffix_;
    VectorT<Scalar> inv_suffix_;
    std::vector<Scalar> group_abs_;
    Scalar shift_ = Scalar(0);
    bool weights_dirty_ = true;
};

}  // namespace detail

/// Exclusive Lasso coordinate descent; lambda is taken from config.
template <class Scalar>
FittedModelT<Scalar> fit_exclusive_lasso(const SurvivalDatasetT<Scalar>& data,
                                         const GroupStructure& groups, const SolverConfig& config,
                                         VectorT<Scalar> beta0) {
    detail::CoxCdEngine<Scalar> engine(data, groups, PenaltySpec::exclusive_lasso(config.lambda),
                                       config, std::move(beta0));
    return engine.run();
}

/// Penalized Cox fit for any supported family; lambda comes from the penalty
/// settings (config.lambda is ignored here).
template <class Scalar>
FittedModelT<Scalar> fit_penalized(const SurvivalDatasetT<Scalar>& data, const GroupStructure& groups,
                                   const PenaltySpec& spec, const SolverConfig& config,
                                   std::optional<VectorT<Scalar>> beta0 = std::nullopt) {
    VectorT<Scalar> start = beta0 ? std::move(*beta0) : VectorT<Scalar>::Zero(data.n_covariates());
    SolverConfig cfg = config;
    cfg.lambda = spec.lambda;
    detail::CoxCdEngine<Scalar> engine(data, groups, spec, cfg, std::move(start));
    return engine.run();
}

/// Sequential warm-started fits along a strictly descending lambda grid.
template <class Scalar>
std::vector<FittedModelT<Scalar>> fit_path(const SurvivalDatasetT<Scalar>& data,
                                           const GroupStructure& groups,
                                           const PenaltySpec& spec_template,
                                           const SolverConfig& config,
                                           const VectorT<Scalar>& lambdas) {
    for (Index i = 0; i + 1 < lambdas.size(); ++i)
        if (!(lambdas(i) > lambdas(i + 1)))
            throw Error("lambda grid must be strictly descending");
    if (lambdas.size() > 0 && lambdas(lambdas.size() - 1) < Scalar(0))
        throw Error("lambda values must be non-negative");

    std::vector<FittedModelT<Scalar>> path;
    path.reserve(static_cast<std::size_t>(lambdas.size()));
    VectorT<Scalar> warm = VectorT<Scalar>::Zero(data.n_covariates());
    for (Index i = 0; i < lambdas.size(); ++i) {
        auto model = fit_penalized<Scalar>(data, groups, spec_template.with_lambda(static_cast<double>(lambdas(i))),
                                           config, warm);
        warm = model.beta;
        path.push_back(std::move(model));
    }
    return path;
}

/// Smallest lambda whose one-sweep threshold from beta = 0 removes every
/// coordinate (block, for Group Lasso). Families without a full-kill
/// threshold (Ridge, Exclusive Lasso) anchor the grid at max_j |score_j|.
template <class Scalar>
Scalar lambda_max(const SurvivalDatasetT<Scalar>& data, const GroupStructure& groups,
                  const PenaltySpec& spec) {
    const VectorT<Scalar> score = gradient(data, VectorT<Scalar>::Zero(data.n_covariates()));
    Scalar result = Scalar(0);
    if (spec.family == PenaltyFamily::GroupLasso) {
        for (Index g = 0; g < groups.n_groups(); ++g) {
            Scalar sq = Scalar(0);
            for (Index j : groups.members(g)) sq += score(j) * score(j);
            result = std::max(result, std::sqrt(sq / Scalar(groups.size(g))));
        }
    } else {
        for (Index j = 0; j < data.n_covariates(); ++j) {
            Scalar factor = Scalar(1);
            if (spec.family == PenaltyFamily::ElasticNet)
                factor = Scalar(std::max(spec.alpha, 0.001));
            else if (spec.family == PenaltyFamily::Ipf)
                factor = Scalar(spec.factor(groups.group_of(j)));
            if (factor <= Scalar(0)) continue;
            result = std::max(result, std::abs(score(j)) / factor);
        }
    }
    return result > Scalar(0) ? result : Scalar(1);
}

/// Logarithmically spaced descending grid from lambda_max down to
/// lambda_max * min_ratio.
template <class Scalar>
VectorT<Scalar> lambda_grid(Scalar max_value, Index size, Scalar min_ratio) {
    if (size < 1) throw Error("grid size must be at least 1");
    if (!(min_ratio > 0 && min_ratio <= 1)) throw Error("grid min ratio must lie in (0, 1]");
    VectorT<Scalar> grid(size);
    if (size == 1) {
        grid(0) = max_value;
        return grid;
    }
    const Scalar log_max = std::log(max_value);
    const Scalar log_min = std::log(max_value * min_ratio);
    for (Index i = 0; i < size; ++i)
        grid(i) = std::exp(log_max + (log_min - log_max) * Scalar(i) / Scalar(size - 1));
    return grid;
}

template <class Scalar>
VectorT<Scalar> default_lambda_grid(const SurvivalDatasetT<Scalar>& data, const GroupStructure& groups,
                                    const PenaltySpec& spec, Index size = 50,
                                    Scalar min_ratio = Scalar(1e-3)) {
    return lambda_grid(lambda_max(data, groups, spec), size, min_ratio);
}

}  // namespace elcox
