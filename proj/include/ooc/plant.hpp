#pragma once

#include <functional>
#include <random>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace ooc {

/// x1' = x2, x2' = -x1 x2 + mu1 x2 (1 - x1^2) + b u + disturbance_gain * v1
struct VdpLike {
    double mu1;
    double disturbance_gain;
    double b;
};

/// m y'' + kappa1 y + kappa2 y^3 + mu1 y' + mu2 y'^3 + amplitude v2 (1 - v1^2) = u,
/// normalized by m so that the input gain is 1/m > 0.
struct DampingSpring {
    double m;
    double kappa1, kappa2;
    double mu1, mu2;
    double amplitude;
};

/// x2' = f(x1, x2, v, t) + b u
struct CustomPlant {
    std::function<double(double, double, const Eigen::VectorXd&, double)> f;
    double b;
};

class Plant {
public:
    using Kind = std::variant<VdpLike, DampingSpring, CustomPlant>;

    explicit Plant(Kind kind);

    const Kind& kind() const noexcept { return kind_; }
    double input_gain() const;
    double drift(double x1, double x2, const Eigen::VectorXd& v, double t) const;
    std::string name() const;

private:
    Kind kind_;
};

/// (x2, f(x1, x2, v, t) + b u)
Eigen::Vector2d plant_derivative(const Plant& p, const Eigen::Vector2d& x, const Eigen::VectorXd& v, double u,
                                 double t);

/// Steady-state input holding the output at s_star with zero velocity:
/// u* = -f(s_star, 0, v) / b. Verification only; throws Unsupported for
/// custom plants.
double feedforward_truth(const Plant& p, double s_star, const Eigen::VectorXd& v);

/// Uniform relative perturbation of every uncertain coefficient within
/// +-relative of its nominal value. Draws giving mu1 <= 0 or b <= 0 are
/// rejected and redrawn.
Plant perturb(const Plant& nominal, double relative, std::mt19937_64& rng);

struct Exosystem {
    Eigen::MatrixXd S;
    Eigen::VectorXd v0;

    Exosystem(Eigen::MatrixXd S, Eigen::VectorXd v0);

    /// S = [[0, sigma], [-sigma, 0]]
    static Exosystem rotation(double sigma, Eigen::Vector2d v0);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(v0.size()); }
    bool is_skew_symmetric(double tol = 0.0) const;
};

Eigen::VectorXd exosystem_derivative(const Exosystem& e, const Eigen::VectorXd& v);

/// Reference plants: agent i (1-based) of each example with nominal values.
Plant example1_plant(int i);
Plant example2_plant(int i);

}  // namespace ooc
