#include <cmath>

#include "doctest.h"
#include "elcox/random.hpp"
#include "elcox/survival.hpp"
#include "oracles.hpp"

using namespace elcox;

namespace {

Observation obs(double time, bool event, std::initializer_list<double> covs) {
    Observation o;
    o.time = time;
    o.event = event;
    o.covariates = Vector(static_cast<Index>(covs.size()));
    Index i = 0;
    for (double c : covs) o.covariates(i++) = c;
    return o;
}

}  // namespace

TEST_CASE("build_dataset sorts by time and computes risk-set boundaries") {
    auto data = build_dataset({obs(2, true, {1.0}), obs(1, true, {2.0}), obs(3, true, {3.0})});
    CHECK(data.sort_order() == std::vector<Index>{1, 0, 2});
    const auto& starts = data.risk_set_starts();
    REQUIRE(starts.size() == 3);
    CHECK(data.n_observations() - starts[0] == 3);
    CHECK(data.n_observations() - starts[1] == 2);
    CHECK(data.n_observations() - starts[2] == 1);
    // original order preserved for covariate addressing
    CHECK(data.covariates()(0, 0) == 1.0);
}

TEST_CASE("build_dataset handles ties in the risk-set boundaries") {
    auto data = build_dataset({obs(1, true, {0.}), obs(1, true, {0.}), obs(2, false, {0.})});
    const auto& starts = data.risk_set_starts();
    CHECK(starts[0] == 0);
    CHECK(starts[1] == 0);
    CHECK(starts[2] == 2);
}

TEST_CASE("build_dataset error cases") {
    CHECK_THROWS_AS(build_dataset({}), EmptyData);
    CHECK_THROWS_AS(build_dataset({obs(1, false, {1.0})}), AllCensored);
    CHECK_NOTHROW(build_dataset({obs(1, true, {1.0})}));  // single-event row is accepted
    CHECK_THROWS_AS(build_dataset({obs(1, true, {1.0}), obs(2, true, {1.0, 2.0})}),
                    RaggedCovariates);
    CHECK_THROWS_AS(build_dataset({obs(1, true, {std::nan("")})}), NonFiniteValue);
    CHECK_THROWS_AS(build_dataset({obs(-1, true, {1.0})}), NonFiniteValue);
    CHECK_THROWS_AS(
        build_dataset({obs(std::numeric_limits<double>::infinity(), true, {1.0})}),
        NonFiniteValue);
}

TEST_CASE("partial log-likelihood at beta = 0 equals -sum log |R|") {
    auto data = build_dataset({obs(1, true, {0.5}), obs(2, true, {1.5}), obs(3, true, {-1.0})});
    const double value = partial_log_likelihood(data, Vector::Zero(1));
    CHECK(value == doctest::Approx(-(std::log(3.0) + std::log(2.0) + std::log(1.0))).epsilon(1e-12));
    CHECK(value == doctest::Approx(-1.791759).epsilon(1e-6));
}

TEST_CASE("single event at earliest of ten times gives -log 10") {
    std::vector<Observation> rows;
    for (int i = 0; i < 10; ++i) rows.push_back(obs(1.0 + i, i == 0, {double(i)}));
    auto data = build_dataset(rows);
    CHECK(partial_log_likelihood(data, Vector::Zero(1)) ==
          doctest::Approx(-std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("partial log-likelihood matches the brute-force evaluation") {
    Rng rng(20260808);
    for (int rep = 0; rep < 20; ++rep) {
        auto data = oracle::random_dataset(rng, 20, 3, 0.3, 0.7, rep % 2 == 1);
        Vector beta(3);
        for (Index j = 0; j < 3; ++j) beta(j) = rng.normal();
        const double ours = partial_log_likelihood(data, beta);
        const double brute = oracle::brute_loglik(data, beta);
        CHECK(ours == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("partial log-likelihood is stable under extreme linear predictors") {
    auto data = build_dataset({obs(1, true, {400.0}), obs(2, true, {-300.0}), obs(3, true, {0.0})});
    Vector beta(1);
    beta << 2.0;  // eta spread of 1400; naive exp would overflow
    const double value = partial_log_likelihood(data, beta);
    CHECK(std::isfinite(value));
    // First event term: eta = 800 dominates its risk set, so log-sum-exp ~ 800.
    CHECK(value == doctest::Approx(0.0 - 600.0 - 0.0).epsilon(1e-9));
}

TEST_CASE("partial log-likelihood validates input") {
    auto data = build_dataset({obs(1, true, {1.0, 2.0})});
    CHECK_THROWS_AS(partial_log_likelihood(data, Vector::Zero(3)), DimensionMismatch);
    Vector bad(2);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(partial_log_likelihood(data, bad), NonFiniteValue);
}

TEST_CASE("gradient component is zero for a constant covariate at beta = 0") {
    auto data = build_dataset({obs(1, true, {3.0}), obs(2, false, {3.0}), obs(3, true, {3.0})});
    CHECK(gradient_component(data, Vector::Zero(1), 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gradient component with one event reduces to x_ij minus risk-set mean") {
    auto data = build_dataset(
        {obs(1, true, {2.0}), obs(2, false, {4.0}), obs(3, false, {6.0}), obs(4, false, {0.0})});
    const double expected = 2.0 - (2.0 + 4.0 + 6.0 + 0.0) / 4.0;
    CHECK(gradient_component(data, Vector::Zero(1), 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gradient component matches a central finite difference") {
    Rng rng(777);
    for (int rep = 0; rep < 25; ++rep) {
        auto data = oracle::random_dataset(rng, 15, 4, 0.25, 0.5, rep % 3 == 0);
        Vector beta(4);
        for (Index j = 0; j < 4; ++j) beta(j) = 0.4 * rng.normal();
        const Index j = static_cast<Index>(rng.below(4));
        const double analytic = gradient_component(data, beta, j);
        const double fd = oracle::central_fd_gradient(data, beta, j);
        CHECK(std::abs(analytic - fd) <= 1e-6);
    }
}

TEST_CASE("full gradient agrees with per-component evaluation") {
    Rng rng(99);
    auto data = oracle::random_dataset(rng, 25, 5);
    Vector beta(5);
    for (Index j = 0; j < 5; ++j) beta(j) = rng.normal() * 0.3;
    const Vector grad = gradient(data, beta);
    for (Index j = 0; j < 5; ++j)
        CHECK(grad(j) == doctest::Approx(gradient_component(data, beta, j)).epsilon(1e-12));
}

TEST_CASE("gradient scales linearly with a column rescale at beta = 0") {
    Rng rng(4242);
    auto data = oracle::random_dataset(rng, 30, 3);
    const double c = 3.7;
    Matrix scaled = data.covariates();
    scaled.col(1) *= c;
    SurvivalDataset rescaled(scaled, data.times(), data.events());
    const double g = gradient_component(data, Vector::Zero(3), 1);
    const double gs = gradient_component(rescaled, Vector::Zero(3), 1);
    CHECK(gs == doctest::Approx(c * g).epsilon(1e-10));
}

TEST_CASE("gradient component rejects bad indices") {
    auto data = build_dataset({obs(1, true, {1.0})});
    CHECK_THROWS_AS(gradient_component(data, Vector::Zero(1), 1), IndexOutOfRange);
    CHECK_THROWS_AS(gradient_component(data, Vector::Zero(1), -1), IndexOutOfRange);
}

TEST_CASE("hessian surrogate sums squared covariates over events only") {
    auto data = build_dataset({obs(1, true, {1.0}), obs(2, true, {-2.0}), obs(3, false, {100.0})});
    CHECK(hessian_diag_approx(data, 0) == 5.0);
}

TEST_CASE("hessian surrogate is zero for a covariate vanishing on events") {
    auto data = build_dataset({obs(1, true, {0.0}), obs(2, false, {5.0})});
    CHECK(hessian_diag_approx(data, 0) == 0.0);
}

TEST_CASE("hessian surrogate equals the direct loop on random data") {
    Rng rng(31);
    auto data = oracle::random_dataset(rng, 50, 4);
    for (Index j = 0; j < 4; ++j)
        CHECK(hessian_diag_approx(data, j) == oracle::brute_hessian_diag(data, j));
}

TEST_CASE("Breslow baseline at beta = 0 with distinct event times") {
    auto data = build_dataset(
        {obs(1, true, {0.}), obs(2, true, {0.}), obs(3, true, {0.}), obs(4, true, {0.})});
    auto table = breslow_baseline(data, Vector::Zero(1));
    REQUIRE(table.times.size() == 4);
    CHECK(table.cum_hazard(0) == doctest::Approx(1.0 / 4).epsilon(1e-14));
    CHECK(table.cum_hazard(1) == doctest::Approx(1.0 / 4 + 1.0 / 3).epsilon(1e-14));
    CHECK(table.cum_hazard(2) == doctest::Approx(1.0 / 4 + 1.0 / 3 + 1.0 / 2).epsilon(1e-14));
    CHECK(table.cum_hazard(3) == doctest::Approx(1.0 / 4 + 1.0 / 3 + 1.0 / 2 + 1.0).epsilon(1e-14));
}

TEST_CASE("Breslow pools tied events into one increment") {
    auto data = build_dataset({obs(1, true, {0.}), obs(1, true, {0.}), obs(2, false, {0.})});
    auto table = breslow_baseline(data, Vector::Zero(1));
    REQUIRE(table.times.size() == 1);
    CHECK(table.times(0) == 1.0);
    CHECK(table.cum_hazard(0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
}

TEST_CASE("Breslow matches the reference implementation on random data") {
    Rng rng(555);
    for (int rep = 0; rep < 10; ++rep) {
        auto data = oracle::random_dataset(rng, 18, 3, 0.3, 0.5, true);
        Vector beta(3);
        for (Index j = 0; j < 3; ++j) beta(j) = 0.5 * rng.normal();
        auto ours = breslow_baseline(data, beta);
        auto ref = oracle::brute_breslow(data, beta);
        REQUIRE(ours.times.size() == static_cast<Index>(ref.size()));
        for (Index i = 0; i < ours.times.size(); ++i) {
            CHECK(ours.times(i) == ref[static_cast<std::size_t>(i)].first);
            CHECK(ours.cum_hazard(i) ==
                  doctest::Approx(ref[static_cast<std::size_t>(i)].second).epsilon(1e-12));
        }
        // non-decreasing cumulative hazard
        for (Index i = 1; i < ours.cum_hazard.size(); ++i)
            CHECK(ours.cum_hazard(i) >= ours.cum_hazard(i - 1));
    }
}

TEST_CASE("predicted survival is one at time zero and constant under beta = 0") {
    Rng rng(808);
    auto data = oracle::random_dataset(rng, 20, 2);
    auto table = breslow_baseline(data, Vector::Zero(2));
    Vector x1(2), x2(2);
    x1 << 1.0, -2.0;
    x2 << 5.0, 3.0;
    CHECK(predict_survival(table, Vector::Zero(2), x1, 0.0) == 1.0);
    for (double t : {0.5, 1.0, 2.0})
        CHECK(predict_survival(table, Vector::Zero(2), x1, t) ==
              doctest::Approx(predict_survival(table, Vector::Zero(2), x2, t)).epsilon(1e-15));
}

TEST_CASE("predicted survival is non-increasing in time and lies in (0, 1]") {
    Rng rng(909);
    for (int rep = 0; rep < 5; ++rep) {
        auto data = oracle::random_dataset(rng, 30, 3);
        Vector beta(3);
        for (Index j = 0; j < 3; ++j) beta(j) = 0.4 * rng.normal();
        auto table = breslow_baseline(data, beta);
        Vector x(3);
        for (Index j = 0; j < 3; ++j) x(j) = rng.normal();
        double prev = 1.0;
        for (double t = 0.0; t < 4.0; t += 0.1) {
            const double s = predict_survival(table, beta, x, t);
            CHECK(s <= prev + 1e-15);
            CHECK(s > 0.0);
            CHECK(s <= 1.0);
            prev = s;
        }
    }
}

TEST_CASE("Kaplan-Meier with all events drops to zero") {
    auto curve = kaplan_meier<double>({1, 2, 3}, {true, true, true});
    REQUIRE(curve.times.size() == 3);
    CHECK(curve.survival(0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(curve.survival(1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(curve.survival(2) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("Kaplan-Meier with no flagged events is constant one") {
    auto curve = kaplan_meier<double>({1, 2, 3}, {false, false, false});
    CHECK(curve.times.size() == 0);
    CHECK(curve.at(0.0) == 1.0);
    CHECK(curve.at(10.0) == 1.0);
}

TEST_CASE("Kaplan-Meier mixed case matches the hand product-limit computation") {
    // times (1,2,3,4), flags (T,F,T,F): S(1) = 3/4, S(3) = 3/4 * 1/2 = 3/8
    auto curve = kaplan_meier<double>({1, 2, 3, 4}, {true, false, true, false});
    CHECK(curve.at(1.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(curve.at(2.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(curve.at(3.0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(curve.at(100.0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(curve.at_left(1.0) == 1.0);
    CHECK(curve.at_left(3.0) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("Kaplan-Meier validates input lengths") {
    CHECK_THROWS_AS(kaplan_meier<double>({1, 2}, {true}), LengthMismatch);
}

TEST_CASE("Kaplan-Meier output satisfies its curve invariants on random input") {
    Rng rng(1234);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> times(n);
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) {
            times[i] = std::round(rng.uniform(0.0, 10.0) * 4.0) / 4.0;  // force some ties
            flags[i] = rng.uniform() < 0.6;
        }
        auto curve = kaplan_meier(times, flags);
        CHECK(curve.at(-1e-9) == 1.0);
        double prev = 1.0;
        for (Index i = 0; i < curve.times.size(); ++i) {
            if (i > 0) CHECK(curve.times(i) > curve.times(i - 1));
            CHECK(curve.survival(i) <= prev + 1e-15);
            CHECK(curve.survival(i) >= 0.0);
            CHECK(curve.survival(i) <= 1.0);
            prev = curve.survival(i);
        }
    }
}

TEST_CASE("subset keeps original covariate rows") {
    auto data = build_dataset({obs(3, true, {1.}), obs(1, true, {2.}), obs(2, false, {3.})});
    auto sub = subset(data, {2, 0});
    CHECK(sub.n_observations() == 2);
    CHECK(sub.covariates()(0, 0) == 3.0);
    CHECK(sub.covariates()(1, 0) == 1.0);
    CHECK_THROWS_AS(subset(data, {5}), IndexOutOfRange);
}
