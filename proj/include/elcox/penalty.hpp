#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "elcox/errors.hpp"
#include "elcox/survival.hpp"

namespace elcox {

/// Disjoint partition of covariate indices into groups.
class GroupStructure {
  public:
    /// group_of[j] = group id of covariate j; ids must form 0..G-1 with no
    /// empty group.
    explicit GroupStructure(std::vector<Index> group_of) : group_of_(std::move(group_of)) {
        if (group_of_.empty()) throw EmptyData("group structure covers no covariates");
        Index max_id = -1;
        for (Index g : group_of_) {
            if (g < 0) throw IndexOutOfRange("negative group id");
            max_id = std::max(max_id, g);
        }
        members_.resize(static_cast<std::size_t>(max_id + 1));
        for (std::size_t j = 0; j < group_of_.size(); ++j)
            members_[static_cast<std::size_t>(group_of_[j])].push_back(static_cast<Index>(j));
        for (const auto& m : members_)
            if (m.empty()) throw EmptyData("group ids must be contiguous with no empty group");
    }

    /// Every covariate in its own group (ids follow covariate order).
    static GroupStructure singletons(Index p) {
        std::vector<Index> ids(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j) ids[static_cast<std::size_t>(j)] = j;
        return GroupStructure(std::move(ids));
    }

    /// All covariates in one group.
    static GroupStructure single_group(Index p) {
        return GroupStructure(std::vector<Index>(static_cast<std::size_t>(p), Index(0)));
    }

    Index n_covariates() const { return static_cast<Index>(group_of_.size()); }
    Index n_groups() const { return static_cast<Index>(members_.size()); }
    Index group_of(Index j) const {
        if (j < 0 || j >= n_covariates()) throw IndexOutOfRange("covariate index out of range");
        return group_of_[static_cast<std::size_t>(j)];
    }
    const std::vector<Index>& members(Index g) const {
        if (g < 0 || g >= n_groups()) throw IndexOutOfRange("group id out of range");
        return members_[static_cast<std::size_t>(g)];
    }
    Index size(Index g) const { return static_cast<Index>(members(g).size()); }
    const std::vector<Index>& group_ids() const { return group_of_; }

  private:
    std::vector<Index> group_of_;
    std::vector<std::vector<Index>> members_;
};

enum class PenaltyFamily { ExclusiveLasso, Lasso, Ridge, ElasticNet, GroupLasso, Ipf };

inline const char* family_name(PenaltyFamily family) {
    switch (family) {
        case PenaltyFamily::ExclusiveLasso: return "exclusive";
        case PenaltyFamily::Lasso: return "lasso";
        case PenaltyFamily::Ridge: return "ridge";
        case PenaltyFamily::ElasticNet: return "elastic";
        case PenaltyFamily::GroupLasso: return "group";
        case PenaltyFamily::Ipf: return "ipf";
    }
    return "unknown";
}

/// Penalty family plus hyperparameters. Fields not used by a family stay at
/// neutral defaults (alpha = 1, unit group factors).
struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::Lasso;
    double lambda = 0.0;
    double alpha = 1.0;
    Vector group_factors;  // per-group factors; empty means all ones

    static PenaltySpec exclusive_lasso(double lambda) {
        return {PenaltyFamily::ExclusiveLasso, lambda, 1.0, {}};
    }
    static PenaltySpec lasso(double lambda) { return {PenaltyFamily::Lasso, lambda, 1.0, {}}; }
    static PenaltySpec ridge(double lambda) { return {PenaltyFamily::Ridge, lambda, 0.0, {}}; }
    static PenaltySpec elastic_net(double lambda, double alpha) {
        return {PenaltyFamily::ElasticNet, lambda, alpha, {}};
    }
    static PenaltySpec group_lasso(double lambda) {
        return {PenaltyFamily::GroupLasso, lambda, 0.0, {}};
    }
    static PenaltySpec ipf(double lambda, Vector factors) {
        return {PenaltyFamily::Ipf, lambda, 1.0, std::move(factors)};
    }

    PenaltySpec with_lambda(double new_lambda) const {
        PenaltySpec out = *this;
        out.lambda = new_lambda;
        return out;
    }

    double factor(Index g) const {
        return group_factors.size() == 0 ? 1.0 : group_factors(g);
    }

    void validate(const GroupStructure& groups) const {
        if (lambda < 0) throw Error("lambda must be non-negative");
        if (alpha < 0 || alpha > 1) throw Error("alpha must lie in [0, 1]");
        if (group_factors.size() != 0) {
            if (group_factors.size() != groups.n_groups())
                throw DimensionMismatch("group factor count does not match group count");
            if ((group_factors.array() < 0).any())
                throw Error("group factors must be non-negative");
        }
    }
};

/// Structural penalty P(beta), without the lambda scale (the solver applies
/// lambda so one evaluation serves a whole path).
template <class Derived>
typename Derived::Scalar penalty_value(const PenaltySpec& spec_in, const GroupStructure& groups,
                                       const Eigen::MatrixBase<Derived>& beta_expr) {
    using Scalar = typename Derived::Scalar;
    const VectorT<Scalar> beta = beta_expr;
    if (beta.size() != groups.n_covariates())
        throw DimensionMismatch("coefficient vector length does not match group structure");
    spec_in.validate(groups);

    switch (spec_in.family) {
        case PenaltyFamily::ExclusiveLasso: {
            Scalar total = Scalar(0);
            for (Index g = 0; g < groups.n_groups(); ++g) {
                Scalar l1 = Scalar(0);
                for (Index j : groups.members(g)) l1 += std::abs(beta(j));
                total += l1 * l1;
            }
            return total / Scalar(2);
        }
        case PenaltyFamily::Lasso:
            return beta.template lpNorm<1>();
        case PenaltyFamily::Ridge:
            return beta.squaredNorm() / Scalar(2);
        case PenaltyFamily::ElasticNet:
            return Scalar(spec_in.alpha) * beta.template lpNorm<1>() +
                   (Scalar(1) - Scalar(spec_in.alpha)) * beta.squaredNorm() / Scalar(2);
        case PenaltyFamily::GroupLasso: {
            Scalar total = Scalar(0);
            for (Index g = 0; g < groups.n_groups(); ++g) {
                Scalar sq = Scalar(0);
                for (Index j : groups.members(g)) sq += beta(j) * beta(j);
                total += std::sqrt(Scalar(groups.size(g))) * std::sqrt(sq);
            }
            return total;
        }
        case PenaltyFamily::Ipf: {
            Scalar total = Scalar(0);
            for (Index g = 0; g < groups.n_groups(); ++g) {
                Scalar l1 = Scalar(0);
                for (Index j : groups.members(g)) l1 += std::abs(beta(j));
                total += Scalar(spec_in.factor(g)) * l1;
            }
            return total;
        }
    }
    throw Error("unknown penalty family");
}

/// Exclusive Lasso per-coordinate threshold: lambda times the absolute sum
/// of j's group-mates (j itself excluded).
template <class Derived>
typename Derived::Scalar exclusive_threshold(const PenaltySpec& spec, const GroupStructure& groups,
                                             const Eigen::MatrixBase<Derived>& beta_expr, Index j) {
    using Scalar = typename Derived::Scalar;
    const VectorT<Scalar> beta = beta_expr;
    if (beta.size() != groups.n_covariates())
        throw DimensionMismatch("coefficient vector length does not match group structure");
    if (j < 0 || j >= groups.n_covariates()) throw IndexOutOfRange("covariate index out of range");
    Scalar sum = Scalar(0);
    for (Index l : groups.members(groups.group_of(j)))
        if (l != j) sum += std::abs(beta(l));
    return Scalar(spec.lambda) * sum;
}

}  // namespace elcox
