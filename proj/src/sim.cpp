#include "ooc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "ooc/errors.hpp"
#include "ooc/integrate.hpp"

namespace ooc {

namespace {

// Independent deterministic streams derived from the scenario seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return std::mt19937_64(seq);
}

enum StreamId : std::uint32_t { plant_stream = 1, init_stream = 2 };

}  // namespace

void Scenario::validate() const {
    const auto n = agents();
    if (costs.size() != n || plants.size() != n || models.size() != n) {
        throw InvalidArgument("scenario needs one cost, plant and internal model per agent (" + std::to_string(n) +
                              ")");
    }
    if (!(step > 0.0)) throw InvalidArgument("step must be positive");
    if (!(horizon >= 10.0 * step)) throw InvalidArgument("horizon must cover at least ten steps");
    if (record_every < 1) throw InvalidArgument("record_every must be at least 1");
    if (init.y_r && static_cast<std::size_t>(init.y_r->size()) != n) {
        throw InvalidArgument("initial y_r must have one entry per agent");
    }
    if (init.x && init.x->size() != n) throw InvalidArgument("initial x must have one entry per agent");
    if (!(init.tracker_range >= 0.0)) throw InvalidArgument("tracker_range must be nonnegative");
    tracker.validate();
    for (const auto& m : models) {
        if (m.M.rows() != m.M.cols() || m.N.size() != m.M.rows() || m.M.rows() == 0) {
            throw InvalidArgument("internal model (M, N) has inconsistent dimensions");
        }
        if (!is_hurwitz(m.M)) throw NotHurwitz("internal-model matrix M is not Hurwitz");
    }
}

CoordinatorGains resolve_gains(const Scenario& sc) {
    if (sc.gains) {
        if (!(sc.gains->beta1 > 0.0) || !(sc.gains->beta2 > 0.0)) {
            throw InvalidArgument("coordinator gains must be positive");
        }
        return *sc.gains;
    }
    const auto spec = spectral_data(sc.graph);
    const auto bounds = convexity_bounds(sc.costs, sc.cost_domain);
    return select_gains(bounds, spec.rho_min, spec.lambda2, sc.gain_margin);
}

StateLayout::StateLayout(std::size_t agents, std::vector<std::size_t> orders, std::size_t exo_dim)
    : n_(agents), nv_(exo_dim), orders_(std::move(orders)) {
    if (orders_.size() != n_) throw InvalidArgument("layout needs one internal-model order per agent");
    Eigen::Index pos = idx(2 * n_ + n_ * n_);
    for (auto s : orders_) {
        base_.push_back(pos);
        pos += idx(2 + 2 * s + 1);
    }
    v_ = pos;
    size_ = pos + idx(nv_);
}

CoordinatorState StateLayout::coordinator(const Eigen::VectorXd& s) const {
    const auto n = idx(n_);
    CoordinatorState c;
    c.y_r = s.segment(0, n);
    c.z = s.segment(n, n);
    c.xi = s.segment(2 * n, n * n).reshaped(n, n).transpose();
    return c;
}

void StateLayout::set_coordinator(Eigen::VectorXd& s, const CoordinatorState& c) const {
    const auto n = idx(n_);
    s.segment(0, n) = c.y_r;
    s.segment(n, n) = c.z;
    s.segment(2 * n, n * n) = c.xi.transpose().reshaped();
}

TrackerState StateLayout::tracker(const Eigen::VectorXd& s, std::size_t i) const {
    const auto order = idx(orders_[i]);
    return {s.segment(eta(i), order), s(k_gain(i)), s.segment(psi(i), order).transpose()};
}

namespace {

std::vector<std::size_t> model_orders(const Scenario& sc) {
    std::vector<std::size_t> out;
    for (const auto& m : sc.models) out.push_back(m.order());
    return out;
}

std::vector<Plant> draw_plants(const Scenario& sc) {
    auto rng = stream(sc.seed, plant_stream);
    std::vector<Plant> out;
    for (const auto& p : sc.plants) out.push_back(perturb(p, sc.plant_uncertainty, rng));
    return out;
}

}  // namespace

System::System(const Scenario& sc)
    : graph_(sc.graph),
      costs_(sc.costs),
      plants_((sc.validate(), draw_plants(sc))),
      exo_(sc.exo),
      gains_(resolve_gains(sc)),
      tracker_(sc.tracker),
      models_(sc.models),
      ablate_(sc.ablate_internal_model),
      layout_(sc.agents(), model_orders(sc), sc.exo.dim()),
      seed_(sc.seed),
      init_(sc.init) {
    if (!is_strongly_connected(graph_)) {
        throw NotStronglyConnected("communication graph is not strongly connected");
    }
}

SystemState System::initial_state() const {
    auto rng = stream(seed_, init_stream);
    const auto n = layout_.agents();
    std::uniform_real_distribution<double> yr(init_.yr_range.lo, init_.yr_range.hi);
    std::uniform_real_distribution<double> xs(init_.x_range.lo, init_.x_range.hi);
    std::uniform_real_distribution<double> tr(-init_.tracker_range, init_.tracker_range);

    Eigen::VectorXd s = Eigen::VectorXd::Zero(layout_.size());
    Eigen::VectorXd y0(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y0(static_cast<Eigen::Index>(i)) = yr(rng);
    if (init_.y_r) y0 = *init_.y_r;
    layout_.set_coordinator(s, CoordinatorState::initial(y0));

    for (std::size_t i = 0; i < n; ++i) {
        const double a = xs(rng), b = xs(rng);
        s(layout_.x1(i)) = a;
        s(layout_.x2(i)) = b;
        if (init_.x) s.segment<2>(layout_.x1(i)) = (*init_.x)[i];
        if (init_.tracker_range > 0.0) {
            const auto order = static_cast<Eigen::Index>(layout_.order(i));
            for (Eigen::Index k = 0; k < order; ++k) s(layout_.eta(i) + k) = tr(rng);
            s(layout_.k_gain(i)) = std::abs(tr(rng));
            for (Eigen::Index k = 0; k < order; ++k) s(layout_.psi(i) + k) = tr(rng);
        }
    }
    s.segment(layout_.v(), static_cast<Eigen::Index>(layout_.exo_dim())) = exo_.v0;
    return {s};
}

Eigen::VectorXd System::derivative(double t, const Eigen::VectorXd& state) const {
    Eigen::VectorXd d(layout_.size());
    const auto coord = layout_.coordinator(state);
    layout_.set_coordinator(d, coordinator_derivative(coord, graph_, costs_, gains_));

    const Eigen::VectorXd v = layout_.exo(state);
    for (std::size_t i = 0; i < layout_.agents(); ++i) {
        const Eigen::Vector2d x = layout_.x(state, i);
        const auto ts = layout_.tracker(state, i);
        const double theta = vartheta(x, coord.y_r(static_cast<Eigen::Index>(i)), tracker_.gamma);
        const double u = control(ts, theta, tracker_, !ablate_);

        d.segment<2>(layout_.x1(i)) = plant_derivative(plants_[i], x, v, u, t);
        const auto td = tracker_derivative(ts, theta, u, tracker_, models_[i]);
        const auto order = static_cast<Eigen::Index>(layout_.order(i));
        d.segment(layout_.eta(i), order) = td.eta;
        d(layout_.k_gain(i)) = td.k_gain;
        d.segment(layout_.psi(i), order) = td.psi_hat.transpose();
    }
    d.segment(layout_.v(), static_cast<Eigen::Index>(layout_.exo_dim())) = exosystem_derivative(exo_, v);
    return d;
}

Eigen::VectorXd System::thetas(const Eigen::VectorXd& state) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(layout_.agents()));
    for (std::size_t i = 0; i < layout_.agents(); ++i) {
        out(static_cast<Eigen::Index>(i)) = vartheta(layout_.x(state, i), state(layout_.y_r(i)), tracker_.gamma);
    }
    return out;
}

Eigen::VectorXd System::inputs(const Eigen::VectorXd& state) const {
    const Eigen::VectorXd th = thetas(state);
    Eigen::VectorXd out(th.size());
    for (std::size_t i = 0; i < layout_.agents(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out(k) = control(layout_.tracker(state, i), th(k), tracker_, !ablate_);
    }
    return out;
}

double System::stiffness_bound(const Eigen::VectorXd& state) const {
    const auto n = layout_.agents();
    const double coord = coordinator_stiffness_bound(layout_.coordinator(state), graph_, costs_, gains_);

    const auto& rho = tracker_.rho;
    double agent = 0.0;
    const Eigen::VectorXd v = layout_.exo(state);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d x = layout_.x(state, i);
        const auto ts = layout_.tracker(state, i);
        const double theta = vartheta(x, state(layout_.y_r(i)), tracker_.gamma);
        const double b = plants_[i].input_gain();
        const double at = std::abs(theta);
        const double r = rho(theta);
        // d(rho(theta) theta)/dtheta and d(rho(theta) theta^2)/dtheta in magnitude
        const double dr_theta = r + rho.coeff * rho.power * std::pow(at, rho.power);
        const double dr_theta2 = at * (2.0 * r + rho.coeff * rho.power * std::pow(at, rho.power));
        double bound = b * std::abs(ts.k_gain) * dr_theta + std::sqrt(b * r * at * dr_theta2);

        // Internal model and feedforward adaptation.
        const double eta = ts.eta.norm(), psi = ts.psi_hat.norm();
        bound += models_[i].M.cwiseAbs().rowwise().sum().maxCoeff() + models_[i].N.norm() * b * psi;
        bound += std::sqrt(b * psi * eta) + at + eta;

        // Plant partials by central differences.
        constexpr double e = 1e-6;
        const double f1 = (plants_[i].drift(x(0) + e, x(1), v, 0.0) - plants_[i].drift(x(0) - e, x(1), v, 0.0)) / (2 * e);
        const double f2 = (plants_[i].drift(x(0), x(1) + e, v, 0.0) - plants_[i].drift(x(0), x(1) - e, v, 0.0)) / (2 * e);
        bound += std::abs(f2) + std::sqrt(std::abs(f1)) + tracker_.gamma + 1.0;
        agent = std::max(agent, bound);
    }
    const double exo = exo_.S.size() ? exo_.S.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    return coord + agent + exo;
}

System assemble(const Scenario& sc) { return System(sc); }

std::size_t guarded_step(const System& system, SystemState& state, double t, double h, double courant,
                         std::size_t max_substeps) {
    std::size_t m = 1;
    if (courant > 0.0) {
        const double need = std::ceil(h * system.stiffness_bound(state.values) / courant);
        if (!std::isfinite(need) || need > static_cast<double>(max_substeps)) {
            throw Diverged("stability guard needs more than " + std::to_string(max_substeps) +
                               " substeps at t = " + std::to_string(t),
                           t);
        }
        m = std::max<std::size_t>(1, static_cast<std::size_t>(need));
    }
    const double hs = h / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) state = rk4_step(system, state, t + static_cast<double>(j) * hs, hs);
    return m;
}

SystemState rk4_step(const System& system, const SystemState& state, double t, double h) {
    auto rhs = [&](double tt, const Eigen::VectorXd& x) { return system.derivative(tt, x); };
    return {rk4_step(rhs, t, state.values, h)};
}

namespace {

void record(Trajectory& traj, const System& sys, const Eigen::VectorXd& rho, double t, const Eigen::VectorXd& s) {
    const auto& L = traj.layout;
    const auto n = L.agents();
    traj.times.push_back(t);
    traj.samples.push_back(s);
    traj.theta.push_back(sys.thetas(s));
    const auto c = L.coordinator(s);
    traj.rho_z.push_back(rho.dot(c.z));
    traj.exo_norm.push_back(L.exo(s).norm());
    double drift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        drift = std::max(drift, std::abs(c.xi.row(static_cast<Eigen::Index>(i)).sum() - 1.0));
    }
    traj.xi_rowsum_drift.push_back(drift);
}

}  // namespace

Trajectory run(const Scenario& sc) {
    const System sys = assemble(sc);
    // Diagnostics only; the controller never sees rho or s*.
    const Eigen::VectorXd rho = left_eigenvector(sc.graph);

    Trajectory traj{sys.layout(), global_optimum(sc.costs), {}, {}, {}, {}, {}, {}, 1, 0};
    auto state = sys.initial_state();
    record(traj, sys, rho, 0.0, state.values);

    const long steps = step_count(sc.horizon, sc.step);
    const auto every = static_cast<long>(sc.record_every);
    for (long k = 1; k <= steps; ++k) {
        const auto m = guarded_step(sys, state, static_cast<double>(k - 1) * sc.step, sc.step, sc.courant,
                                    sc.max_substeps);
        traj.max_substeps_used = std::max(traj.max_substeps_used, m);
        traj.total_substeps += m;
        if (k % every == 0) record(traj, sys, rho, static_cast<double>(k) * sc.step, state.values);
    }
    return traj;
}

Metrics metrics(const Trajectory& traj, double s_star) {
    if (traj.size() == 0) throw InvalidArgument("metrics need a nonempty trajectory");
    constexpr double band = 0.02;
    Metrics m{{}, 0.0};
    const auto& L = traj.layout;
    for (std::size_t i = 0; i < L.agents(); ++i) {
        AgentMetrics a{};
        a.final_error = std::abs(traj.output(traj.size() - 1, i) - s_star);
        a.settling_time = 0.0;
        for (std::size_t k = traj.size(); k-- > 0;) {
            if (std::abs(traj.output(k, i) - s_star) >= band) {
                a.settling_time =
                    k + 1 < traj.size() ? traj.times[k + 1] : std::numeric_limits<double>::infinity();
                break;
            }
        }
        a.max_gain = -std::numeric_limits<double>::infinity();
        for (const auto& s : traj.samples) a.max_gain = std::max(a.max_gain, s(L.k_gain(i)));
        a.final_gain = traj.samples.back()(L.k_gain(i));
        m.max_final_error = std::max(m.max_final_error, a.final_error);
        m.agents.push_back(a);
    }
    return m;
}

bool VerificationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

VerificationReport verify(const Scenario& sc, const Trajectory& traj) {
    if (traj.size() == 0) throw InvalidArgument("verify needs a nonempty trajectory");
    VerificationReport r;
    const auto& L = traj.layout;
    const auto n = L.agents();
    const auto last = traj.size() - 1;
    auto add = [&](std::string name, double value, double tol) {
        r.checks.push_back({std::move(name), value, tol, value < tol});
    };

    r.s_star = global_optimum(sc.costs);
    for (std::size_t i = 0; i < n; ++i) {
        r.final_output_error = std::max(r.final_output_error, std::abs(traj.output(last, i) - r.s_star));
    }
    const double from = sc.tol.velocity_from < 0.0 ? traj.times[last] : sc.tol.velocity_from;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] + 1e-12 < from) continue;
        for (std::size_t i = 0; i < n; ++i) r.velocity_error = std::max(r.velocity_error, std::abs(traj.velocity(k, i)));
    }

    const Eigen::VectorXd rho = left_eigenvector(sc.graph);
    for (std::size_t i = 0; i < n; ++i) {
        r.xi_error = std::max(r.xi_error, std::abs(traj.samples[last](L.xi(i, i)) - rho(static_cast<Eigen::Index>(i))));
    }
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto c = L.coordinator(traj.samples[k]);
        r.z_conservation_drift = std::max(r.z_conservation_drift, std::abs(rho.dot(c.z)));
        r.xi_rowsum_drift = std::max(r.xi_rowsum_drift, traj.xi_rowsum_drift[k]);
    }
    if (sc.exo.is_skew_symmetric(1e-15)) {
        const double v0 = sc.exo.v0.norm();
        double drift = 0.0;
        for (double e : traj.exo_norm) drift = std::max(drift, std::abs(e - v0));
        r.exo_energy_drift = drift;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 1; k < traj.size(); ++k) {
            if (traj.samples[k](L.k_gain(i)) < traj.samples[k - 1](L.k_gain(i))) r.k_monotone = false;
        }
    }

    if (!sc.truth_frequencies.empty()) {
        const auto ff = phi_gamma(sc.truth_frequencies);
        double psi_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& im = sc.models[i];
            const Eigen::MatrixXd T = solve_sylvester(im.M, im.N, ff.Phi, ff.Gamma);
            r.sylvester_residuals.push_back(sylvester_residual(T, im.M, im.N, ff.Phi, ff.Gamma));
            if (T.rows() == T.cols()) {
                const Eigen::RowVectorXd psi = psi_true(T, ff.Gamma);
                if (i == 0) r.psi_target = psi;
                const Eigen::RowVectorXd est = L.tracker(traj.samples[last], i).psi_hat;
                psi_err = std::max(psi_err, (est - psi).cwiseAbs().maxCoeff());
            }
        }
        if (r.psi_target) r.psi_error = psi_err;
    }

    add("final_output_error", r.final_output_error, sc.tol.output);
    add("velocity_error", r.velocity_error, sc.tol.velocity);
    add("xi_error", r.xi_error, sc.tol.xi);
    add("z_conservation_drift", r.z_conservation_drift, sc.tol.z_drift);
    add("xi_rowsum_drift", r.xi_rowsum_drift, sc.tol.rowsum_drift);
    if (r.exo_energy_drift) add("exo_energy_drift", *r.exo_energy_drift, sc.tol.exo_drift);
    for (std::size_t i = 0; i < r.sylvester_residuals.size(); ++i) {
        add("sylvester_residual_" + std::to_string(i + 1), r.sylvester_residuals[i], sc.tol.sylvester);
    }
    if (sc.tol.psi) {
        if (!r.psi_error) throw InvalidArgument("psi tolerance set but no square truth model is available");
        add("psi_error", *r.psi_error, *sc.tol.psi);
    }
    r.checks.push_back({"k_monotone", r.k_monotone ? 1.0 : 0.0, 1.0, r.k_monotone});
    return r;
}

void set_scalar_field(Scenario& sc, std::string_view field, double value) {
    auto explicit_gains = [&]() -> CoordinatorGains& {
        if (!sc.gains) sc.gains = resolve_gains(sc);
        return *sc.gains;
    };
    if (field == "beta1") explicit_gains().beta1 = value;
    else if (field == "beta2") explicit_gains().beta2 = value;
    else if (field == "gain_margin") { sc.gain_margin = value; sc.gains.reset(); }
    else if (field == "gamma") sc.tracker.gamma = value;
    else if (field == "rho_coeff") sc.tracker.rho.coeff = value;
    else if (field == "step") sc.step = value;
    else if (field == "horizon") sc.horizon = value;
    else if (field == "seed") sc.seed = static_cast<std::uint64_t>(value);
    else if (field == "plant_uncertainty") sc.plant_uncertainty = value;
    else throw InvalidArgument("unknown sweep field '" + std::string(field) + "'");
}

std::vector<SweepResult> sweep(const Scenario& base, std::string_view field, std::span<const double> values,
                               std::size_t workers) {
    std::vector<SweepResult> results(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) results[k].value = values[k];
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, values.size()));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            try {
                Scenario sc = base;
                set_scalar_field(sc, field, values[k]);
                results[k].report = verify(sc, run(sc));
            } catch (const std::exception& e) {
                results[k].error = e.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return results;
}

}  // namespace ooc
