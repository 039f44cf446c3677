#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "elcox/errors.hpp"

namespace elcox {

using Index = Eigen::Index;

template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<double>;
using Matrix = MatrixT<double>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// One subject: observed time, event indicator (true = event, false =
/// censored) and covariate row.
template <class Scalar>
struct ObservationT {
    Scalar time = Scalar(0);
    bool event = false;
    VectorT<Scalar> covariates;
};

using Observation = ObservationT<double>;

/// Right-censored survival data with the precomputed time-sorted view used by
/// every likelihood pass. Immutable after construction.
///
/// The sorted view keeps, for each sorted position k, the first position of
/// its tie block: the risk set of the observation at position k is the
/// suffix [risk_set_starts()[k], n).
template <class Scalar>
class SurvivalDatasetT {
  public:
    SurvivalDatasetT(MatrixT<Scalar> covariates, VectorT<Scalar> times, BoolArray events)
        : X_(std::move(covariates)), time_(std::move(times)), event_(std::move(events)) {
        validate();
        build_sorted_view();
    }

    Index n_observations() const { return X_.rows(); }
    Index n_covariates() const { return X_.cols(); }
    Index n_events() const { return n_events_; }

    /// Covariates in original row order.
    const MatrixT<Scalar>& covariates() const { return X_; }
    const VectorT<Scalar>& times() const { return time_; }
    const BoolArray& events() const { return event_; }

    /// Permutation of original indices by ascending time (stable).
    const std::vector<Index>& sort_order() const { return sort_order_; }
    /// Per sorted position: the first sorted position of its tie block.
    const std::vector<Index>& risk_set_starts() const { return risk_start_; }

    /// Covariates / times / events rearranged into sorted order; the layout
    /// the likelihood passes iterate over.
    const MatrixT<Scalar>& covariates_sorted() const { return X_sorted_; }
    const VectorT<Scalar>& times_sorted() const { return time_sorted_; }
    const BoolArray& events_sorted() const { return event_sorted_; }

  private:
    void validate() const {
        const Index n = X_.rows();
        if (n == 0) throw EmptyData("dataset has no observations");
        if (time_.size() != n || event_.size() != n)
            throw LengthMismatch("times/events length does not match covariate rows");
        for (Index i = 0; i < n; ++i) {
            const Scalar t = time_(i);
            if (!std::isfinite(static_cast<double>(t)) || t < Scalar(0))
                throw NonFiniteValue("observation time must be finite and non-negative");
        }
        if (!X_.allFinite()) throw NonFiniteValue("covariates contain non-finite values");
        if (!event_.any()) throw AllCensored("dataset contains no event observations");
    }

    void build_sorted_view() {
        const Index n = X_.rows();
        sort_order_.resize(static_cast<std::size_t>(n));
        std::iota(sort_order_.begin(), sort_order_.end(), Index(0));
        std::stable_sort(sort_order_.begin(), sort_order_.end(),
                         [this](Index a, Index b) { return time_(a) < time_(b); });

        X_sorted_.resize(n, X_.cols());
        time_sorted_.resize(n);
        event_sorted_.resize(n);
        for (Index k = 0; k < n; ++k) {
            const Index src = sort_order_[static_cast<std::size_t>(k)];
            X_sorted_.row(k) = X_.row(src);
            time_sorted_(k) = time_(src);
            event_sorted_(k) = event_(src);
        }

        risk_start_.resize(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) {
            risk_start_[static_cast<std::size_t>(k)] =
                (k > 0 && time_sorted_(k - 1) == time_sorted_(k))
                    ? risk_start_[static_cast<std::size_t>(k - 1)]
                    : k;
        }
        n_events_ = event_.count();
    }

    MatrixT<Scalar> X_;
    VectorT<Scalar> time_;
    BoolArray event_;

    std::vector<Index> sort_order_;
    std::vector<Index> risk_start_;
    MatrixT<Scalar> X_sorted_;
    VectorT<Scalar> time_sorted_;
    BoolArray event_sorted_;
    Index n_events_ = 0;
};

using SurvivalDataset = SurvivalDatasetT<double>;

/// Builds a dataset from per-subject rows, checking dimensions and values.
template <class Scalar>
SurvivalDatasetT<Scalar> build_dataset(const std::vector<ObservationT<Scalar>>& rows) {
    if (rows.empty()) throw EmptyData("no observation rows supplied");
    const Index p = rows.front().covariates.size();
    const Index n = static_cast<Index>(rows.size());
    MatrixT<Scalar> X(n, p);
    VectorT<Scalar> time(n);
    BoolArray event(n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (row.covariates.size() != p)
            throw RaggedCovariates("observation rows have differing covariate lengths");
        X.row(i) = row.covariates.transpose();
        time(i) = row.time;
        event(i) = row.event;
    }
    return SurvivalDatasetT<Scalar>(std::move(X), std::move(time), std::move(event));
}

inline SurvivalDataset build_dataset(const std::vector<Observation>& rows) {
    return build_dataset<double>(rows);
}

/// Extracts the sub-dataset formed by the given original-order row indices.
template <class Scalar>
SurvivalDatasetT<Scalar> subset(const SurvivalDatasetT<Scalar>& data, const std::vector<Index>& rows) {
    const Index m = static_cast<Index>(rows.size());
    MatrixT<Scalar> X(m, data.n_covariates());
    VectorT<Scalar> time(m);
    BoolArray event(m);
    for (Index i = 0; i < m; ++i) {
        const Index src = rows[static_cast<std::size_t>(i)];
        if (src < 0 || src >= data.n_observations())
            throw IndexOutOfRange("subset row index out of range");
        X.row(i) = data.covariates().row(src);
        time(i) = data.times()(src);
        event(i) = data.events()(src);
    }
    return SurvivalDatasetT<Scalar>(std::move(X), std::move(time), std::move(event));
}

namespace detail {

template <class Scalar>
void check_beta(const SurvivalDatasetT<Scalar>& data, const VectorT<Scalar>& beta) {
    if (beta.size() != data.n_covariates())
        throw DimensionMismatch("coefficient vector length does not match covariate count");
    if (!beta.allFinite()) throw NonFiniteValue("coefficient vector contains non-finite values");
}

template <class Scalar>
VectorT<Scalar> to_eigen(const std::vector<Scalar>& values) {
    VectorT<Scalar> out(static_cast<Index>(values.size()));
    for (Index i = 0; i < out.size(); ++i) out(i) = values[static_cast<std::size_t>(i)];
    return out;
}

}  // namespace detail

/// Cox partial log-likelihood evaluated from precomputed sorted linear
/// predictors. Risk-set sums use a backward pass with running-max rescaling,
/// so large linear predictors do not overflow.
template <class Scalar>
Scalar partial_log_likelihood_sorted(const SurvivalDatasetT<Scalar>& data,
                                     const VectorT<Scalar>& eta_sorted) {
    const Index n = data.n_observations();
    if (eta_sorted.size() != n) throw DimensionMismatch("eta length does not match n");
    const auto& starts = data.risk_set_starts();
    const auto& event = data.events_sorted();

    // log-sum-exp over each suffix, recorded at tie-block starts
    std::vector<Scalar> block_lse(static_cast<std::size_t>(n));
    Scalar running_max = -std::numeric_limits<Scalar>::infinity();
    Scalar sum = Scalar(0);
    for (Index k = n - 1; k >= 0; --k) {
        const Scalar e = eta_sorted(k);
        if (e > running_max) {
            sum = sum * std::exp(running_max - e) + Scalar(1);
            running_max = e;
        } else {
            sum += std::exp(e - running_max);
        }
        if (starts[static_cast<std::size_t>(k)] == k)
            block_lse[static_cast<std::size_t>(k)] = running_max + std::log(sum);
    }

    Scalar loglik = Scalar(0);
    for (Index k = 0; k < n; ++k) {
        if (!event(k)) continue;
        loglik += eta_sorted(k) - block_lse[static_cast<std::size_t>(starts[static_cast<std::size_t>(k)])];
    }
    return loglik;
}

/// Cox partial log-likelihood at the given coefficients.
template <class Scalar, class Derived>
Scalar partial_log_likelihood(const SurvivalDatasetT<Scalar>& data,
                              const Eigen::MatrixBase<Derived>& beta) {
    const VectorT<Scalar> b = beta;
    detail::check_beta(data, b);
    const VectorT<Scalar> eta = data.covariates_sorted() * b;
    return partial_log_likelihood_sorted(data, eta);
}

/// Score component for covariate j given sorted linear predictors: the sum
/// over events of x_ij minus the exp-weighted risk-set mean of column j.
template <class Scalar>
Scalar gradient_component_sorted(const SurvivalDatasetT<Scalar>& data,
                                 const VectorT<Scalar>& eta_sorted, Index j) {
    const Index n = data.n_observations();
    if (j < 0 || j >= data.n_covariates()) throw IndexOutOfRange("covariate index out of range");
    if (eta_sorted.size() != n) throw DimensionMismatch("eta length does not match n");
    const auto& starts = data.risk_set_starts();
    const auto& event = data.events_sorted();
    const auto col = data.covariates_sorted().col(j);

    Scalar running_max = -std::numeric_limits<Scalar>::infinity();
    Scalar denom = Scalar(0);  // sum of exp(eta - running_max) over the suffix
    Scalar numer = Scalar(0);  // sum of x * exp(eta - running_max)
    Scalar grad = Scalar(0);
    Scalar block_event_x = Scalar(0);
    Index block_event_count = 0;

    for (Index k = n - 1; k >= 0; --k) {
        const Scalar e = eta_sorted(k);
        if (e > running_max) {
            const Scalar rescale = std::exp(running_max - e);
            denom = denom * rescale + Scalar(1);
            numer = numer * rescale + col(k);
            running_max = e;
        } else {
            const Scalar w = std::exp(e - running_max);
            denom += w;
            numer += col(k) * w;
        }
        if (event(k)) {
            block_event_x += col(k);
            ++block_event_count;
        }
        if (starts[static_cast<std::size_t>(k)] == k && block_event_count > 0) {
            grad += block_event_x - Scalar(block_event_count) * (numer / denom);
            block_event_x = Scalar(0);
            block_event_count = 0;
        }
    }
    return grad;
}

/// Score component dl/dbeta_j at the given coefficients.
template <class Scalar, class Derived>
Scalar gradient_component(const SurvivalDatasetT<Scalar>& data,
                          const Eigen::MatrixBase<Derived>& beta, Index j) {
    const VectorT<Scalar> b = beta;
    detail::check_beta(data, b);
    const VectorT<Scalar> eta = data.covariates_sorted() * b;
    return gradient_component_sorted(data, eta, j);
}

/// Full score vector in one backward pass.
template <class Scalar, class Derived>
VectorT<Scalar> gradient(const SurvivalDatasetT<Scalar>& data,
                         const Eigen::MatrixBase<Derived>& beta) {
    const VectorT<Scalar> b = beta;
    detail::check_beta(data, b);
    const Index n = data.n_observations();
    const Index p = data.n_covariates();
    const VectorT<Scalar> eta = data.covariates_sorted() * b;
    const auto& starts = data.risk_set_starts();
    const auto& event = data.events_sorted();
    const auto& X = data.covariates_sorted();

    Scalar running_max = -std::numeric_limits<Scalar>::infinity();
    Scalar denom = Scalar(0);
    VectorT<Scalar> numer = VectorT<Scalar>::Zero(p);
    VectorT<Scalar> grad = VectorT<Scalar>::Zero(p);
    VectorT<Scalar> block_event_x = VectorT<Scalar>::Zero(p);
    Index block_event_count = 0;

    for (Index k = n - 1; k >= 0; --k) {
        const Scalar e = eta(k);
        if (e > running_max) {
            const Scalar rescale = std::exp(running_max - e);
            denom = denom * rescale + Scalar(1);
            numer = numer * rescale + X.row(k).transpose();
            running_max = e;
        } else {
            const Scalar w = std::exp(e - running_max);
            denom += w;
            numer += X.row(k).transpose() * w;
        }
        if (event(k)) {
            block_event_x += X.row(k).transpose();
            ++block_event_count;
        }
        if (starts[static_cast<std::size_t>(k)] == k && block_event_count > 0) {
            grad += block_event_x - (Scalar(block_event_count) / denom) * numer;
            block_event_x.setZero();
            block_event_count = 0;
        }
    }
    return grad;
}

/// Curvature surrogate H_j = sum over event observations of x_ij^2. Does not
/// depend on beta, so callers precompute it once per fit.
template <class Scalar>
Scalar hessian_diag_approx(const SurvivalDatasetT<Scalar>& data, Index j) {
    if (j < 0 || j >= data.n_covariates()) throw IndexOutOfRange("covariate index out of range");
    const auto col = data.covariates().col(j);
    const auto& event = data.events();
    Scalar sum = Scalar(0);
    for (Index i = 0; i < data.n_observations(); ++i)
        if (event(i)) sum += col(i) * col(i);
    return sum;
}

/// H_j for every covariate.
template <class Scalar>
VectorT<Scalar> hessian_diag(const SurvivalDatasetT<Scalar>& data) {
    VectorT<Scalar> h(data.n_covariates());
    for (Index j = 0; j < data.n_covariates(); ++j) h(j) = hessian_diag_approx(data, j);
    return h;
}

/// Step table of the cumulative baseline hazard at distinct event times.
template <class Scalar>
struct BaselineHazardTableT {
    VectorT<Scalar> times;       // distinct event times, ascending
    VectorT<Scalar> cum_hazard;  // non-decreasing

    /// Right-continuous lookup; 0 before the first event time.
    Scalar cumulative_at(Scalar t) const {
        const Index m = times.size();
        Index lo = 0, hi = m;  // first index with times[idx] > t
        while (lo < hi) {
            const Index mid = lo + (hi - lo) / 2;
            if (times(mid) <= t) lo = mid + 1; else hi = mid;
        }
        return lo == 0 ? Scalar(0) : cum_hazard(lo - 1);
    }
};

using BaselineHazardTable = BaselineHazardTableT<double>;

/// Breslow estimator of the cumulative baseline hazard: at each distinct
/// event time, d / sum_{risk set} exp(eta), ties pooled.
template <class Scalar, class Derived>
BaselineHazardTableT<Scalar> breslow_baseline(const SurvivalDatasetT<Scalar>& data,
                                              const Eigen::MatrixBase<Derived>& beta) {
    const VectorT<Scalar> b = beta;
    detail::check_beta(data, b);
    const Index n = data.n_observations();
    const VectorT<Scalar> eta = data.covariates_sorted() * b;
    const auto& starts = data.risk_set_starts();
    const auto& event = data.events_sorted();
    const auto& time = data.times_sorted();

    std::vector<Scalar> block_lse(static_cast<std::size_t>(n));
    Scalar running_max = -std::numeric_limits<Scalar>::infinity();
    Scalar sum = Scalar(0);
    for (Index k = n - 1; k >= 0; --k) {
        const Scalar e = eta(k);
        if (e > running_max) {
            sum = sum * std::exp(running_max - e) + Scalar(1);
            running_max = e;
        } else {
            sum += std::exp(e - running_max);
        }
        if (starts[static_cast<std::size_t>(k)] == k)
            block_lse[static_cast<std::size_t>(k)] = running_max + std::log(sum);
    }

    std::vector<Scalar> out_times, out_hazard;
    Scalar cum = Scalar(0);
    Index k = 0;
    while (k < n) {
        Index end = k + 1;
        while (end < n && starts[static_cast<std::size_t>(end)] == k) ++end;
        Index d = 0;
        for (Index i = k; i < end; ++i)
            if (event(i)) ++d;
        if (d > 0) {
            cum += std::exp(std::log(Scalar(d)) - block_lse[static_cast<std::size_t>(k)]);
            out_times.push_back(time(k));
            out_hazard.push_back(cum);
        }
        k = end;
    }

    BaselineHazardTableT<Scalar> table;
    table.times = detail::to_eigen(out_times);
    table.cum_hazard = detail::to_eigen(out_hazard);
    return table;
}

/// Survival probability exp(-H0(t) * exp(x'beta)) under a fitted baseline.
template <class Scalar, class DerivedB, class DerivedX>
Scalar predict_survival(const BaselineHazardTableT<Scalar>& baseline,
                        const Eigen::MatrixBase<DerivedB>& beta,
                        const Eigen::MatrixBase<DerivedX>& covariates, Scalar t) {
    const VectorT<Scalar> b = beta;
    const VectorT<Scalar> x = covariates;
    if (x.size() != b.size())
        throw DimensionMismatch("covariate vector length does not match coefficients");
    const Scalar risk = std::exp(x.dot(b));
    return std::exp(-baseline.cumulative_at(t) * risk);
}

/// Product-limit curve: survival value after each distinct drop time.
template <class Scalar>
struct KaplanMeierCurveT {
    VectorT<Scalar> times;     // distinct times with at least one flagged event
    VectorT<Scalar> survival;  // value at (and right of) the matching time

    /// S(t), right-continuous; 1 before the first drop.
    Scalar at(Scalar t) const {
        Index lo = 0, hi = times.size();
        while (lo < hi) {
            const Index mid = lo + (hi - lo) / 2;
            if (times(mid) <= t) lo = mid + 1; else hi = mid;
        }
        return lo == 0 ? Scalar(1) : survival(lo - 1);
    }

    /// Left limit S(t-).
    Scalar at_left(Scalar t) const {
        Index lo = 0, hi = times.size();
        while (lo < hi) {
            const Index mid = lo + (hi - lo) / 2;
            if (times(mid) < t) lo = mid + 1; else hi = mid;
        }
        return lo == 0 ? Scalar(1) : survival(lo - 1);
    }
};

using KaplanMeierCurve = KaplanMeierCurveT<double>;

/// Kaplan-Meier estimator over the supplied flags. Callers estimating a
/// censoring distribution pass inverted event flags.
template <class Scalar>
KaplanMeierCurveT<Scalar> kaplan_meier(const std::vector<Scalar>& times,
                                       const std::vector<bool>& flags) {
    if (times.size() != flags.size())
        throw LengthMismatch("times and flags have different lengths");
    const Index n = static_cast<Index>(times.size());
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return times[static_cast<std::size_t>(a)] < times[static_cast<std::size_t>(b)];
    });

    std::vector<Scalar> out_times, out_surv;
    Scalar surv = Scalar(1);
    Index k = 0;
    while (k < n) {
        const Scalar t = times[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        Index end = k;
        Index drops = 0;
        while (end < n && times[static_cast<std::size_t>(order[static_cast<std::size_t>(end)])] == t) {
            if (flags[static_cast<std::size_t>(order[static_cast<std::size_t>(end)])]) ++drops;
            ++end;
        }
        if (drops > 0) {
            const Index at_risk = n - k;
            surv *= Scalar(1) - Scalar(drops) / Scalar(at_risk);
            out_times.push_back(t);
            out_surv.push_back(surv);
        }
        k = end;
    }

    KaplanMeierCurveT<Scalar> curve;
    curve.times = detail::to_eigen(out_times);
    curve.survival = detail::to_eigen(out_surv);
    return curve;
}

}  // namespace elcox
