#include <doctest.h>

#include <cmath>

#include "ooc/errors.hpp"
#include "ooc/integrate.hpp"
#include "ooc/scenario_io.hpp"
#include "ooc/sim.hpp"

using namespace ooc;

namespace {

Scenario short_example1(double horizon = 5.0) {
    auto sc = load_scenario("example1");
    sc.horizon = horizon;
    return sc;
}

}  // namespace

TEST_CASE("rk4 on the rotation problem") {
    Eigen::Matrix2d S;
    S << 0, 1, -1, 0;
    auto f = [&](double, const Eigen::VectorXd& v) -> Eigen::VectorXd { return S * v; };
    const double h = 0.1;
    const Eigen::VectorXd v = rk4_step(f, 0.0, Eigen::Vector2d(1, 0), h);
    CHECK(std::abs(v(0) - std::cos(h)) < 1e-6);
    CHECK(std::abs(v(1) + std::sin(h)) < 1e-6);

    auto zero = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.size()); };
    const Eigen::VectorXd x0 = Eigen::Vector3d(1.5, -2, 3);
    CHECK(rk4_step(zero, 0.0, x0, 0.5) == x0);

    // terminal error at t = 1 shrinks ~16x per halving
    auto error = [&](double step) {
        Eigen::VectorXd x = Eigen::Vector2d(1, 0);
        for (long k = 0; k < step_count(1.0, step); ++k) x = rk4_step(f, k * step, x, step);
        return (x - Eigen::Vector2d(std::cos(1.0), -std::sin(1.0))).norm();
    };
    for (double step : {0.1, 0.05, 0.025}) {
        const double ratio = error(step) / error(step / 2);
        CAPTURE(step);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }

    auto blow = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.array().square() * 1e300; };
    CHECK_THROWS_AS(rk4_step(blow, 0.0, Eigen::VectorXd::Constant(1, 1e10), 1.0), Diverged);
}

TEST_CASE("assemble") {
    const System a(load_scenario("example1"));
    CHECK(a.layout().agents() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a.layout().order(i) == 2);
    CHECK(a.layout().size() == 2 * 5 + 25 + 5 * (2 + 2 + 1 + 2) + 2);

    const System b(load_scenario("example2"));
    for (std::size_t i = 0; i < 5; ++i) CHECK(b.layout().order(i) == 4);

    auto sc = load_scenario("example1");
    sc.graph = Digraph(5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
    sc.gains = CoordinatorGains{1.0, 1.0, 0.0};
    CHECK_THROWS_AS(System{sc}, NotStronglyConnected);
}

TEST_CASE("scenario validation") {
    auto sc = load_scenario("example1");
    sc.step = 0.0;
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
    sc = load_scenario("example1");
    sc.horizon = 5 * sc.step;
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
    sc = load_scenario("example1");
    sc.record_every = 0;
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
    sc = load_scenario("example1");
    sc.plants.pop_back();
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
    sc = load_scenario("example1");
    sc.models[0].M(1, 0) = 2.0;
    CHECK_THROWS_AS(sc.validate(), NotHurwitz);
    sc = load_scenario("example1");
    sc.gains = CoordinatorGains{-1.0, 1.0, 0.0};
    CHECK_THROWS_AS(resolve_gains(sc), InvalidArgument);
}

TEST_CASE("initial state follows the scenario") {
    auto sc = load_scenario("example1");
    const System sys(sc);
    const auto s = sys.initial_state().values;
    const auto& L = sys.layout();
    const auto c = L.coordinator(s);
    CHECK(c.z.isZero(0.0));
    CHECK(c.xi.isIdentity(0.0));
    CHECK(c.y_r.cwiseAbs().maxCoeff() <= 5.0);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(L.x(s, i).cwiseAbs().maxCoeff() <= 2.0);
        CHECK(L.tracker(s, i).k_gain == 0.0);
        CHECK(L.tracker(s, i).psi_hat.isZero(0.0));
    }
    CHECK(L.exo(s).isApprox(Eigen::Vector2d(0, 10)));

    Eigen::VectorXd y0(5);
    y0 << 1, 2, 3, 4, 5;
    sc.init.y_r = y0;
    sc.init.x = std::vector<Eigen::Vector2d>(5, Eigen::Vector2d(0.5, -0.5));
    const System fixed(sc);
    const auto f = fixed.initial_state().values;
    CHECK(fixed.layout().coordinator(f).y_r == y0);
    CHECK(fixed.layout().x(f, 3) == Eigen::Vector2d(0.5, -0.5));
}

TEST_CASE("trajectory shape and determinism") {
    const auto sc = short_example1(5.0);
    const auto a = run(sc);
    const auto b = run(sc);
    REQUIRE(a.size() == static_cast<std::size_t>(std::floor(sc.horizon / (sc.step * sc.record_every))) + 1);
    for (std::size_t k = 1; k < a.size(); ++k) CHECK(a.times[k] > a.times[k - 1]);
    REQUIRE(a.size() == b.size());
    bool identical = true;
    for (std::size_t k = 0; k < a.size(); ++k) identical = identical && (a.samples[k].array() == b.samples[k].array()).all();
    CHECK(identical);
    CHECK(a.total_substeps == b.total_substeps);

    auto other = sc;
    other.seed = 2;
    CHECK_FALSE((run(other).samples[0].array() == a.samples[0].array()).all());
}

TEST_CASE("ablation removes the internal-model input") {
    auto sc = short_example1(1.0);
    sc.init.tracker_range = 0.5;
    const System full(sc);
    sc.ablate_internal_model = true;
    const System ablated(sc);
    const auto s = full.initial_state().values;
    const auto& L = full.layout();
    const auto th = full.thetas(s);
    const auto u_full = full.inputs(s), u_abl = ablated.inputs(s);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto ts = L.tracker(s, i);
        const auto e = static_cast<Eigen::Index>(i);
        CHECK(u_full(e) == doctest::Approx(control(ts, th(e), sc.tracker)));
        CHECK(u_abl(e) == doctest::Approx(control(ts, th(e), sc.tracker, false)));
    }
}

TEST_CASE("metrics") {
    auto sc = short_example1(1.0);
    auto tr = run(sc);
    // pin every output to the optimum
    for (auto& s : tr.samples)
        for (std::size_t i = 0; i < 5; ++i) s(tr.layout.x1(i)) = 3.0;
    const auto m = metrics(tr, 3.0);
    for (const auto& a : m.agents) {
        CHECK(a.final_error == 0.0);
        CHECK(a.settling_time == 0.0);
        CHECK(std::isfinite(a.max_gain));
        CHECK(a.final_gain <= a.max_gain);
    }
    CHECK(m.max_final_error == 0.0);

    tr.samples.back()(tr.layout.x1(2)) = 4.0;
    CHECK(std::isinf(metrics(tr, 3.0).agents[2].settling_time));

    Trajectory empty{tr.layout, 0.0, {}, {}, {}, {}, {}, {}};
    CHECK_THROWS_AS(metrics(empty, 3.0), InvalidArgument);
}

TEST_CASE("full example 1 run: convergence, conservation, settling") {
    const auto sc = load_scenario("example1");
    const auto tr = run(sc);
    const auto r = verify(sc, tr);
    CHECK(r.s_star == doctest::Approx(3.0));
    CHECK(r.final_output_error < 5e-2);
    CHECK(r.xi_error < 1e-6);
    CHECK(r.z_conservation_drift < 1e-8);
    CHECK(r.xi_rowsum_drift < 1e-9);
    REQUIRE(r.exo_energy_drift);
    CHECK(*r.exo_energy_drift < 1e-8);
    CHECK(r.k_monotone);
    REQUIRE(r.psi_target);
    CHECK((*r.psi_target - Eigen::RowVector2d(1.36, 3.0)).cwiseAbs().maxCoeff() < 1e-10);
    for (double res : r.sylvester_residuals) CHECK(res < 1e-10);

    const auto m = metrics(tr, r.s_star);
    for (const auto& a : m.agents) {
        CHECK(std::isfinite(a.settling_time));
        CHECK(std::isfinite(a.max_gain));
    }

    // no late divergence: once settled, the error never leaves its settled bound
    double settle = 0.0;
    for (const auto& a : m.agents) settle = std::max(settle, a.settling_time);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.times[k] < settle) continue;
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(tr.output(k, i) - 3.0) < 0.02);
    }
}

TEST_CASE("verify reports failing tolerances") {
    auto sc = short_example1(2.0);
    sc.tol.output = 1e-12;
    const auto r = verify(sc, run(sc));
    CHECK_FALSE(r.passed());
    bool found = false;
    for (const auto& c : r.checks) found = found || (c.name == "final_output_error" && !c.passed);
    CHECK(found);
}

TEST_CASE("divergence is an error, not a clamp") {
    auto sc = short_example1(1.0);
    sc.courant = 0.0;
    CHECK_THROWS_AS(run(sc), Diverged);

    sc.courant = 1.0;
    sc.max_substeps = 1;
    CHECK_THROWS_AS(run(sc), Diverged);
}

TEST_CASE("sweep matches serial runs") {
    const auto base = short_example1(2.0);
    const std::vector<double> seeds{1, 2, 3};
    const auto results = sweep(base, "seed", seeds, 3);
    REQUIRE(results.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        auto sc = base;
        set_scalar_field(sc, "seed", seeds[k]);
        REQUIRE(results[k].report);
        CHECK(results[k].report->final_output_error == verify(sc, run(sc)).final_output_error);
    }
    auto sc = base;
    CHECK_THROWS_AS(set_scalar_field(sc, "nope", 1.0), InvalidArgument);
    set_scalar_field(sc, "beta1", 50.0);
    CHECK(sc.gains->beta1 == 50.0);
    set_scalar_field(sc, "gain_margin", 3.0);
    CHECK_FALSE(sc.gains.has_value());

    const std::vector<double> bad_steps{0.0};
    const auto failed = sweep(base, "step", bad_steps, 1);
    CHECK_FALSE(failed[0].report.has_value());
    CHECK_FALSE(failed[0].error.empty());
}
