#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ooc/errors.hpp"

namespace ooc {

/// One classical fourth-order Runge-Kutta step of x' = f(t, x).
/// Throws Diverged if the result is not finite.
template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& f, double t, const Eigen::VectorXd& x, double h) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, (x + 0.5 * h * k1).eval());
    const Eigen::VectorXd k3 = f(t + 0.5 * h, (x + 0.5 * h * k2).eval());
    const Eigen::VectorXd k4 = f(t + h, (x + h * k3).eval());
    Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw Diverged("state became non-finite at t = " + std::to_string(t + h), t + h);
    }
    return next;
}

/// Number of fixed steps covering [0, horizon] with step h.
inline long step_count(double horizon, double h) { return std::lround(horizon / h); }

}  // namespace ooc
