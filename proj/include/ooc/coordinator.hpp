#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ooc/costs.hpp"
#include "ooc/digraph.hpp"

namespace ooc {

// Upper-layer optimal coordinator state for all agents.
struct CoordinatorState {
    Eigen::VectorXd y_r;  // reference signals
    Eigen::VectorXd z;    // integral (dual-like) auxiliaries
    Eigen::MatrixXd xi;   // row i is agent i's imbalance estimator

    // z(0) = 0, xi(0) = I.
    static CoordinatorState initial(const Eigen::VectorXd& y0);
};

struct CoordinatorGains {
    double beta1;
    double beta2;
    double delta;  // analysis slack; only meaningful for selected gains

    // The three sufficient inequalities; all must be strictly positive.
    double curvature_margin(const ConvexityBounds& b) const;
    double dual_margin(double rho_min) const;
    double consensus_margin(double lambda2) const;
};

/// Successively picks delta, beta2, beta1 so that each sufficient inequality
/// holds with `margin` times its boundary value. margin = 2 gives
///   delta = iota^2 / (4 varpi), beta2 = 4 delta / rho_min,
///   beta1 = 2 beta2^2 / (delta lambda2).
CoordinatorGains select_gains(const ConvexityBounds& bounds, double rho_min, double lambda2, double margin = 2.0);

inline constexpr double xi_floor = 1e-9;

/// Time derivative of the coordinator. Consensus sums run over in-neighbours,
/// i.e. the compact form -beta1 L y_r. Throws XiUnderflow when any xi_ii
/// drops below xi_floor.
CoordinatorState coordinator_derivative(const CoordinatorState& state, const Digraph& g,
                                        std::span<const CostFunction> costs, const CoordinatorGains& gains);

struct CoordinatorTrajectory {
    std::vector<double> times;
    std::vector<CoordinatorState> samples;

    const CoordinatorState& final_state() const { return samples.back(); }
};

/// Upper bound on the spectral radius of the coordinator Jacobian at `state`.
double coordinator_stiffness_bound(const CoordinatorState& state, const Digraph& g,
                                   std::span<const CostFunction> costs, const CoordinatorGains& gains);

/// Integrates the coordinator alone with fixed-step RK4 and records every
/// `record_every` steps (plus the initial state). Each step is split into
/// ceil(step * bound / courant) equal RK4 substeps; courant <= 0 disables this.
CoordinatorTrajectory coordinator_only_run(const Digraph& g, std::span<const CostFunction> costs,
                                           const CoordinatorGains& gains, const Eigen::VectorXd& y0,
                                           double horizon, double step, std::size_t record_every = 100,
                                           double courant = 1.0);

}  // namespace ooc
