#include <cmath>

#include "doctest.h"
#include "elcox/model_selection.hpp"
#include "oracles.hpp"

using namespace elcox;

namespace {

SolverConfig cv_config() {
    SolverConfig config;
    config.tolerance = 1e-8;
    config.max_sweeps = 2000;
    return config;
}

}  // namespace

TEST_CASE("make_folds balances sizes and stratifies events") {
    Rng rng(1);
    auto data = oracle::random_dataset(rng, 10, 2, 0.0);  // all events
    auto plan = make_folds(data, 5, 1, 42);
    REQUIRE(plan.fold_of.size() == 1);
    std::vector<int> sizes(5, 0), events(5, 0);
    for (Index i = 0; i < 10; ++i) {
        const int f = static_cast<int>(plan.fold_of[0][static_cast<std::size_t>(i)]);
        ++sizes[static_cast<std::size_t>(f)];
        if (data.events()(i)) ++events[static_cast<std::size_t>(f)];
    }
    for (int f = 0; f < 5; ++f) {
        CHECK(sizes[static_cast<std::size_t>(f)] == 2);
        CHECK(events[static_cast<std::size_t>(f)] >= 1);
    }
}

TEST_CASE("make_folds rejects plans without events in every fold") {
    Matrix X(5, 1);
    X << 1, 2, 3, 4, 5;
    Vector time(5);
    time << 1, 2, 3, 4, 5;
    BoolArray event(5);
    event << true, false, false, false, false;
    SurvivalDataset data(X, time, event);
    CHECK_THROWS_AS(make_folds(data, 5, 1, 0), TooFewEvents);
    CHECK_THROWS_AS(make_folds(data, 1, 1, 0), Error);
    CHECK_THROWS_AS(make_folds(data, 6, 1, 0), Error);
    CHECK_THROWS_AS(make_folds(data, 2, 0, 0), Error);
}

TEST_CASE("make_folds is deterministic and balanced across random shapes") {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const Index n = 12 + static_cast<Index>(rng.below(30));
        auto data = oracle::random_dataset(rng, n, 2, 0.3);
        const int k = 2 + static_cast<int>(rng.below(3));
        if (data.n_events() < k) continue;
        auto plan_a = make_folds(data, k, 3, 99);
        auto plan_b = make_folds(data, k, 3, 99);
        CHECK(plan_a.fold_of == plan_b.fold_of);

        for (int r = 0; r < 3; ++r) {
            std::vector<int> sizes(static_cast<std::size_t>(k), 0);
            std::vector<int> events(static_cast<std::size_t>(k), 0);
            for (Index i = 0; i < n; ++i) {
                const auto f = static_cast<std::size_t>(plan_a.fold_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]);
                ++sizes[f];
                if (data.events()(i)) ++events[f];
            }
            const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
            CHECK(*hi - *lo <= 1);
            for (int count : events) CHECK(count >= 1);
        }
    }
}

TEST_CASE("cv score at huge lambda matches the beta = 0 closed form") {
    Rng rng(3);
    auto data = oracle::random_dataset(rng, 24, 2, 0.25);
    auto groups = GroupStructure::single_group(2);
    auto plan = make_folds(data, 3, 1, 7);

    Vector grid(1);
    grid << 1e7;  // every fold fit collapses to beta = 0
    auto result = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);

    double expected = 0.0;
    const Vector zero = Vector::Zero(2);
    for (int f = 0; f < 3; ++f) {
        const auto train = subset(data, plan.train_rows(0, f));
        expected += oracle::brute_loglik(data, zero) - oracle::brute_loglik(train, zero);
    }
    CHECK(result.mean_cv_loglik(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cv matches a hand-executed two-fold procedure") {
    Rng rng(4);
    auto data = oracle::random_dataset(rng, 6, 1, 0.2);
    auto groups = GroupStructure::single_group(1);

    CvPlan plan;
    plan.k = 2;
    plan.repeats = 1;
    plan.seed = 0;
    plan.fold_of = {{0, 1, 0, 1, 0, 1}};

    Vector grid(2);
    grid << 0.8, 0.2;
    auto result = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);

    for (Index i = 0; i < 2; ++i) {
        double expected = 0.0;
        for (int f = 0; f < 2; ++f) {
            const auto train = subset(data, plan.train_rows(0, f));
            const auto fit = fit_penalized<double>(train, groups, PenaltySpec::lasso(grid(i)),
                                                   cv_config());
            expected += oracle::brute_loglik(data, fit.beta) - oracle::brute_loglik(train, fit.beta);
        }
        CHECK(result.mean_cv_loglik(i) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("best lambda is a member of the grid and ties pick the larger value") {
    Rng rng(5);
    auto data = oracle::random_dataset(rng, 30, 3, 0.3);
    auto groups = GroupStructure::single_group(3);
    auto plan = make_folds(data, 3, 1, 11);

    Vector grid(3);
    grid << 2e7, 1e7, 0.05;  // the two huge values give identical zero fits
    auto result = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);
    bool member = false;
    for (Index i = 0; i < grid.size(); ++i) member = member || result.best_lambda == grid(i);
    CHECK(member);
    CHECK(result.mean_cv_loglik(0) == result.mean_cv_loglik(1));
    if (result.best_index <= 1) CHECK(result.best_lambda == grid(0));
}

TEST_CASE("cv scores are invariant to observation order") {
    Rng rng(6);
    auto data = oracle::random_dataset(rng, 20, 2, 0.25);
    auto groups = GroupStructure::single_group(2);

    std::vector<Index> perm(20);
    std::iota(perm.begin(), perm.end(), Index(0));
    Rng shuffler(123);
    shuffler.shuffle(perm);
    auto shuffled = subset(data, perm);

    CvPlan plan;
    plan.k = 2;
    plan.repeats = 1;
    plan.seed = 0;
    plan.fold_of.resize(1);
    plan.fold_of[0].resize(20);
    CvPlan shuffled_plan = plan;
    shuffled_plan.fold_of.resize(1);
    shuffled_plan.fold_of[0].resize(20);
    for (Index i = 0; i < 20; ++i) plan.fold_of[0][static_cast<std::size_t>(i)] = i % 2;
    for (Index i = 0; i < 20; ++i)
        shuffled_plan.fold_of[0][static_cast<std::size_t>(i)] =
            plan.fold_of[0][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];

    Vector grid(2);
    grid << 0.5, 0.1;
    auto a = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);
    auto b = cv_predictive_loglik(shuffled, groups, PenaltySpec::lasso(0), cv_config(),
                                  shuffled_plan, grid);
    for (Index i = 0; i < 2; ++i)
        CHECK(a.mean_cv_loglik(i) == doctest::Approx(b.mean_cv_loglik(i)).epsilon(1e-10));
}

TEST_CASE("repeated cv with the same seed is bitwise reproducible") {
    Rng rng(7);
    auto data = oracle::random_dataset(rng, 25, 2, 0.3);
    auto groups = GroupStructure::single_group(2);
    auto plan = make_folds(data, 3, 4, 2024);
    Vector grid(2);
    grid << 0.4, 0.1;
    auto a = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);
    auto b = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);
    for (Index i = 0; i < 2; ++i) {
        CHECK(a.mean_cv_loglik(i) == b.mean_cv_loglik(i));
        CHECK(a.se_cv_loglik(i) == b.se_cv_loglik(i));
    }
    CHECK(a.best_lambda == b.best_lambda);
}

TEST_CASE("the one-standard-error lambda is the largest within reach of the maximum") {
    Rng rng(55);
    auto data = oracle::random_dataset(rng, 40, 3, 0.3);
    auto groups = GroupStructure::single_group(3);
    auto plan = make_folds(data, 4, 1, 9);
    Vector grid(6);
    grid << 3.0, 1.5, 0.8, 0.4, 0.2, 0.1;
    auto result = cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, grid);

    REQUIRE(result.best_index >= 0);
    REQUIRE(result.index_1se >= 0);
    CHECK(result.lambda_1se >= result.best_lambda);
    CHECK(result.index_1se <= result.best_index);
    const double floor_score =
        result.mean_cv_loglik(result.best_index) - result.se_cv_loglik(result.best_index);
    CHECK(result.mean_cv_loglik(result.index_1se) >= floor_score);
    // nothing at a larger lambda reaches the floor
    for (Index i = 0; i < result.index_1se; ++i)
        CHECK(result.mean_cv_loglik(i) < floor_score);
}

TEST_CASE("refining the grid never lowers the best cv score") {
    Rng rng(8);
    auto data = oracle::random_dataset(rng, 40, 3, 0.3);
    auto groups = GroupStructure::single_group(3);
    auto plan = make_folds(data, 4, 1, 5);

    Vector coarse(3);
    coarse << 1.0, 0.3, 0.1;
    Vector fine(5);
    fine << 1.0, 0.55, 0.3, 0.18, 0.1;  // superset of the coarse grid
    auto coarse_result =
        cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, coarse);
    auto fine_result =
        cv_predictive_loglik(data, groups, PenaltySpec::lasso(0), cv_config(), plan, fine);
    CHECK(fine_result.mean_cv_loglik(fine_result.best_index) >=
          coarse_result.mean_cv_loglik(coarse_result.best_index) - 1e-12);
}

TEST_CASE("ipf factors from group means") {
    Vector means(2);
    means << 0.2, 0.1;
    const Vector factors = ipf_factors_from_means(means);
    CHECK(factors(0) == doctest::Approx(1.0));
    CHECK(factors(1) == doctest::Approx(2.0));

    Vector equal(3);
    equal << 0.4, 0.4, 0.4;
    const Vector all_one = ipf_factors_from_means(equal);
    for (Index g = 0; g < 3; ++g) CHECK(all_one(g) == doctest::Approx(1.0));

    Vector with_zero(2);
    with_zero << 0.5, 0.0;
    const Vector capped = ipf_factors_from_means(with_zero, 1e4);
    CHECK(capped(0) == doctest::Approx(1.0));
    CHECK(capped(1) == 1e4);

    CHECK_THROWS_AS(ipf_factors_from_means(Vector::Zero(2)), AllZeroStepOne);
}

TEST_CASE("two-step factors cap a pure-noise group") {
    // group 0 carries real signal, group 1 is identically zero (orthogonal
    // to everything): its step-one ridge coefficients stay exactly zero
    Rng rng(9);
    const Index n = 60;
    Matrix X(n, 4);
    for (Index i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
        X(i, 2) = 0.0;
        X(i, 3) = 0.0;
    }
    Vector beta_true(4);
    beta_true << 1.0, -1.0, 0.0, 0.0;
    const Vector eta = X * beta_true;
    Vector time(n);
    BoolArray event(n);
    for (Index i = 0; i < n; ++i) {
        time(i) = rng.exponential(std::exp(eta(i)));
        event(i) = rng.uniform() < 0.8;
    }
    SurvivalDataset data(X, time, event);
    GroupStructure groups({0, 0, 1, 1});

    TwoStepIpfConfig config;
    config.solver = cv_config();
    config.seed = 3;
    const Vector factors = two_step_ipf_factors(data, groups, config);
    CHECK(factors(0) == doctest::Approx(1.0));
    CHECK(factors(1) == 1e4);
}

TEST_CASE("two-step factors rank stronger groups lower") {
    Rng rng(10);
    const Index n = 80;
    Matrix X(n, 4);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 4; ++j) X(i, j) = rng.normal();
    Vector beta_true(4);
    beta_true << 1.5, 1.5, 0.1, 0.1;  // group 0 much stronger
    const Vector eta = X * beta_true;
    Vector time(n);
    BoolArray event(n);
    for (Index i = 0; i < n; ++i) {
        time(i) = rng.exponential(std::exp(eta(i)));
        event(i) = rng.uniform() < 0.85;
    }
    SurvivalDataset data(X, time, event);
    GroupStructure groups({0, 0, 1, 1});

    TwoStepIpfConfig config;
    config.solver = cv_config();
    config.seed = 4;
    const Vector factors = two_step_ipf_factors(data, groups, config);
    CHECK(factors(0) == doctest::Approx(1.0));
    CHECK(factors(1) > 1.0);  // weaker group is penalized harder

    CHECK_THROWS_AS(two_step_ipf_factors(data, GroupStructure::single_group(4), config), Error);
}
