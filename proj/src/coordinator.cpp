#include "ooc/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ooc/errors.hpp"
#include "ooc/integrate.hpp"

namespace ooc {

CoordinatorState CoordinatorState::initial(const Eigen::VectorXd& y0) {
    const auto n = y0.size();
    return {y0, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n)};
}

double CoordinatorGains::curvature_margin(const ConvexityBounds& b) const {
    return 2.0 * b.varpi - b.iota_bar * b.iota_bar / (4.0 * delta);
}

double CoordinatorGains::dual_margin(double rho_min) const { return beta2 * rho_min - 2.0 * delta; }

double CoordinatorGains::consensus_margin(double lambda2) const {
    return beta1 * lambda2 - beta2 * beta2 / delta;
}

CoordinatorGains select_gains(const ConvexityBounds& bounds, double rho_min, double lambda2, double margin) {
    if (!(lambda2 > 0.0) || !(rho_min > 0.0)) {
        throw InvalidSpectrum("gain selection needs lambda2 > 0 and rho_min > 0");
    }
    if (!(bounds.varpi > 0.0) || bounds.iota_bar < bounds.varpi) {
        throw InvalidArgument("gain selection needs 0 < varpi <= iota_bar");
    }
    if (!(margin > 1.0)) {
        throw InvalidArgument("gain margin must exceed 1");
    }
    CoordinatorGains g{};
    g.delta = margin * bounds.iota_bar * bounds.iota_bar / (8.0 * bounds.varpi);
    g.beta2 = margin * 2.0 * g.delta / rho_min;
    g.beta1 = margin * g.beta2 * g.beta2 / (g.delta * lambda2);

    if (!(g.curvature_margin(bounds) > 0.0 && g.dual_margin(rho_min) > 0.0 && g.consensus_margin(lambda2) > 0.0)) {
        throw InvalidSpectrum("selected gains violate the sufficient inequalities");
    }
    return g;
}

CoordinatorState coordinator_derivative(const CoordinatorState& state, const Digraph& g,
                                        std::span<const CostFunction> costs, const CoordinatorGains& gains) {
    const auto n = static_cast<Eigen::Index>(g.size());
    CoordinatorState d{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double self = state.xi(i, i);
        if (!(self >= xi_floor)) {
            throw XiUnderflow("xi_" + std::to_string(i + 1) + "^" + std::to_string(i + 1) + " = " +
                              std::to_string(self) + " fell below the floor");
        }
        double disagreement = 0.0;
        Eigen::RowVectorXd xi_dot = Eigen::RowVectorXd::Zero(n);
        for (auto j : g.in_neighbors(static_cast<std::size_t>(i))) {
            const double a = g.weight(static_cast<std::size_t>(i), j);
            const auto jj = static_cast<Eigen::Index>(j);
            disagreement += a * (state.y_r(i) - state.y_r(jj));
            xi_dot -= a * (state.xi.row(i) - state.xi.row(jj));
        }
        const double consensus = gains.beta1 * disagreement;
        d.y_r(i) = -costs[static_cast<std::size_t>(i)].grad(state.y_r(i)) / self - consensus - gains.beta2 * state.z(i);
        d.z(i) = consensus;
        d.xi.row(i) = xi_dot;
    }
    return d;
}

double coordinator_stiffness_bound(const CoordinatorState& state, const Digraph& g,
                                  std::span<const CostFunction> costs, const CoordinatorGains& gains) {
    const auto n = static_cast<Eigen::Index>(g.size());
    double max_degree = 0.0, curvature = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        max_degree = std::max(max_degree, g.weights().row(i).sum());
        constexpr double e = 1e-4;
        const double y = state.y_r(i);
        const auto& c = costs[static_cast<std::size_t>(i)];
        const double hess = std::abs(c.grad(y + e) - c.grad(y - e)) / (2.0 * e);
        curvature = std::max(curvature, hess / std::max(state.xi(i, i), xi_floor));
    }
    // Gershgorin on beta1 L plus the scaled curvature, and the xi block.
    return 2.0 * gains.beta1 * max_degree + gains.beta2 + curvature + 2.0 * max_degree;
}

namespace {

Eigen::VectorXd pack(const CoordinatorState& s) {
    const auto n = s.y_r.size();
    Eigen::VectorXd out(2 * n + n * n);
    out << s.y_r, s.z, s.xi.transpose().reshaped();
    return out;
}

CoordinatorState unpack(const Eigen::VectorXd& v, Eigen::Index n) {
    CoordinatorState s;
    s.y_r = v.segment(0, n);
    s.z = v.segment(n, n);
    s.xi = v.segment(2 * n, n * n).reshaped(n, n).transpose();
    return s;
}

}  // namespace

CoordinatorTrajectory coordinator_only_run(const Digraph& g, std::span<const CostFunction> costs,
                                           const CoordinatorGains& gains, const Eigen::VectorXd& y0,
                                           double horizon, double step, std::size_t record_every,
                                           double courant) {
    const auto n = static_cast<Eigen::Index>(g.size());
    if (y0.size() != n || costs.size() != g.size()) {
        throw InvalidArgument("coordinator run: dimension mismatch between graph, costs and y0");
    }
    if (!(step > 0.0) || !(horizon > 0.0) || record_every < 1) {
        throw InvalidArgument("coordinator run: need step > 0, horizon > 0, record_every >= 1");
    }
    auto rhs = [&](double, const Eigen::VectorXd& x) { return pack(coordinator_derivative(unpack(x, n), g, costs, gains)); };

    CoordinatorTrajectory traj;
    Eigen::VectorXd x = pack(CoordinatorState::initial(y0));
    traj.times.push_back(0.0);
    traj.samples.push_back(unpack(x, n));
    const long steps = step_count(horizon, step);
    for (long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k - 1) * step;
        long m = 1;
        if (courant > 0.0) {
            const double bound = coordinator_stiffness_bound(unpack(x, n), g, costs, gains);
            m = std::max(1L, static_cast<long>(std::ceil(step * bound / courant)));
        }
        const double hs = step / static_cast<double>(m);
        for (long j = 0; j < m; ++j) x = rk4_step(rhs, t + static_cast<double>(j) * hs, x, hs);
        if (k % static_cast<long>(record_every) == 0) {
            traj.times.push_back(static_cast<double>(k) * step);
            traj.samples.push_back(unpack(x, n));
        }
    }
    return traj;
}

}  // namespace ooc
