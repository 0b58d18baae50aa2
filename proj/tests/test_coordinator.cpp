#include <doctest.h>

#include <chrono>

#include <unsupported/Eigen/MatrixFunctions>

#include "ooc/coordinator.hpp"
#include "ooc/errors.hpp"

using namespace ooc;

TEST_CASE("gain selection rule") {
    auto g = select_gains({0.2, 0.2}, 1.0 / 3.0, 1.0);
    CHECK(g.delta == doctest::Approx(0.05));
    CHECK(g.beta2 == doctest::Approx(0.6));
    CHECK(g.beta1 == doctest::Approx(14.4));
    CHECK(g.curvature_margin({0.2, 0.2}) > 0.0);
    CHECK(g.dual_margin(1.0 / 3.0) > 0.0);
    CHECK(g.consensus_margin(1.0) > 0.0);

    g = select_gains({1.0, 1.0}, 1.0, 2.0);
    CHECK(g.delta == doctest::Approx(0.25));
    CHECK(g.beta2 == doctest::Approx(1.0));
    CHECK(g.beta1 == doctest::Approx(4.0));

    // a larger margin still satisfies every inequality
    g = select_gains({0.3, 1.7}, 0.05, 0.2, 3.0);
    CHECK(g.curvature_margin({0.3, 1.7}) > 0.0);
    CHECK(g.dual_margin(0.05) > 0.0);
    CHECK(g.consensus_margin(0.2) > 0.0);

    CHECK_THROWS_AS(select_gains({0.2, 0.2}, 1.0 / 3.0, 0.0), InvalidSpectrum);
    CHECK_THROWS_AS(select_gains({0.2, 0.2}, 0.0, 1.0), InvalidSpectrum);
    CHECK_THROWS_AS(select_gains({0.2, 0.2}, 0.5, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("equilibrium is stationary") {
    const auto g = example_network();
    const auto costs = example1_costs();
    const auto sd = spectral_data(g);
    const auto gains = select_gains(convexity_bounds(costs, {}), sd.rho_min, sd.lambda2);
    const double s = 3.0;

    CoordinatorState eq;
    eq.y_r = Eigen::VectorXd::Constant(5, s);
    eq.xi = Eigen::VectorXd::Ones(5) * sd.rho.transpose();
    eq.z.resize(5);
    for (Eigen::Index i = 0; i < 5; ++i) eq.z(i) = -costs[static_cast<std::size_t>(i)].grad(s) / (sd.rho(i) * gains.beta2);
    CHECK(std::abs(sd.rho.dot(eq.z)) < 1e-12);

    const auto d = coordinator_derivative(eq, g, costs, gains);
    CHECK(d.y_r.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(d.z.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(d.xi.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("xi underflow is an error") {
    const auto g = example_network();
    auto s = CoordinatorState::initial(Eigen::VectorXd::Zero(5));
    s.xi(2, 2) = 0.0;
    CHECK_THROWS_AS(coordinator_derivative(s, g, example1_costs(), CoordinatorGains{1.0, 1.0, 0.1}), XiUnderflow);
}

TEST_CASE("coordinator-only run on the quadratic costs") {
    const auto g = example_network();
    const auto costs = example1_costs();
    const auto sd = spectral_data(g);
    const auto gains = select_gains(convexity_bounds(costs, {}), sd.rho_min, sd.lambda2);
    Eigen::VectorXd y0(5);
    y0 << -4.0, 2.0, 5.0, 0.5, -1.0;

    const auto tr = coordinator_only_run(g, costs, gains, y0, 100.0, 1e-3);
    REQUIRE(tr.samples.size() == 1001);
    CHECK(tr.times.back() == doctest::Approx(100.0));
    const auto& f = tr.final_state();
    CHECK((f.y_r.array() - 3.0).abs().maxCoeff() < 1e-6);
    CHECK((f.xi.diagonal() - sd.rho).cwiseAbs().maxCoeff() < 1e-8);

    // xi obeys the linear flow xi' = -L xi exactly, so xi(t) = exp(-tL)
    const Eigen::MatrixXd L = laplacian(g);
    for (std::size_t k : {10ul, 50ul, 200ul}) {
        const Eigen::MatrixXd flow = (-tr.times[k] * L).exp();
        CHECK((tr.samples[k].xi - flow).cwiseAbs().maxCoeff() < 1e-10);
    }
    for (const auto& s : tr.samples) {
        CHECK(std::abs(sd.rho.dot(s.z)) < 1e-8);
        CHECK((s.xi.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("coordinator-only run on the composite costs") {
    const auto g = example_network();
    const auto costs = example2_costs({-5.0, 5.0});
    const CoordinatorGains gains{20.0, 2.0, 0.0};
    Eigen::VectorXd y0(5);
    y0 << 1.0, -2.0, 3.0, 0.0, 4.5;
    const auto tr = coordinator_only_run(g, costs, gains, y0, 100.0, 1e-3);
    const double s = global_optimum(costs);
    CHECK((tr.final_state().y_r.array() - s).abs().maxCoeff() < 1e-6);
}

TEST_CASE("stability guard can be disabled") {
    const auto g = example_network();
    const auto costs = example1_costs();
    const CoordinatorGains stiff{2000.0, 2.0, 0.0};
    const Eigen::VectorXd y0 = Eigen::VectorXd::LinSpaced(5, -2.0, 2.0);
    CHECK_THROWS_AS(coordinator_only_run(g, costs, stiff, y0, 1.0, 1e-3, 100, 0.0), Diverged);
    CHECK_NOTHROW(coordinator_only_run(g, costs, stiff, y0, 1.0, 1e-3, 100, 1.0));
}

TEST_CASE("run argument checks") {
    const auto g = example_network();
    const CoordinatorGains gains{1.0, 1.0, 0.0};
    CHECK_THROWS_AS(coordinator_only_run(g, example1_costs(), gains, Eigen::VectorXd::Zero(4), 1.0, 1e-3),
                    InvalidArgument);
    CHECK_THROWS_AS(coordinator_only_run(g, example1_costs(), gains, Eigen::VectorXd::Zero(5), 1.0, 0.0),
                    InvalidArgument);
}
