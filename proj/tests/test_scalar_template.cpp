// The numerical core is templated on the scalar type; exercise a float
// instantiation end to end on a tiny fit.
#include "doctest.h"
#include "elcox/solver.hpp"

using namespace elcox;

TEST_CASE("float instantiation of the core pipeline") {
    using FMatrix = MatrixT<float>;
    using FVector = VectorT<float>;

    FMatrix X(6, 2);
    X << 0.5f, -1.0f, 1.0f, 0.3f, -0.7f, 0.9f, 0.2f, -0.4f, 1.3f, 0.8f, -1.1f, 0.6f;
    FVector time(6);
    time << 1.f, 2.f, 3.f, 4.f, 5.f, 6.f;
    BoolArray event(6);
    event << true, true, false, true, true, false;
    SurvivalDatasetT<float> data(X, time, event);

    const float loglik = partial_log_likelihood(data, FVector::Zero(2));
    CHECK(loglik < 0.0f);
    CHECK(gradient_component(data, FVector::Zero(2), 0) ==
          doctest::Approx(gradient(data, FVector::Zero(2))(0)));

    SolverConfig config;
    config.tolerance = 1e-4;
    auto model = fit_penalized<float>(data, GroupStructure::single_group(2),
                                      PenaltySpec::exclusive_lasso(0.5), config);
    CHECK(model.beta.allFinite());
    CHECK(model.converged);

    const auto baseline = breslow_baseline(data, model.beta);
    CHECK(baseline.times.size() == 4);
    FVector x(2);
    x << 0.1f, 0.2f;
    const float survival = predict_survival(model, x, 2.5f);
    CHECK(survival > 0.0f);
    CHECK(survival <= 1.0f);
}
