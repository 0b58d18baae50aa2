#include "ooc/plant.hpp"

#include "ooc/errors.hpp"

namespace ooc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double v_at(const Eigen::VectorXd& v, Eigen::Index k) {
    if (v.size() <= k) {
        throw InvalidArgument("exosystem state has " + std::to_string(v.size()) + " components, plant reads v" +
                              std::to_string(k + 1));
    }
    return v(k);
}

}  // namespace

Plant::Plant(Kind kind) : kind_(std::move(kind)) {
    if (!(input_gain() > 0.0)) {
        throw InvalidArgument("plant input gain must be positive");
    }
    if (auto* c = std::get_if<CustomPlant>(&kind_); c && !c->f) {
        throw InvalidArgument("custom plant needs a drift function");
    }
}

double Plant::input_gain() const {
    return std::visit(overloaded{
                          [](const VdpLike& p) { return p.b; },
                          [](const DampingSpring& p) { return 1.0 / p.m; },
                          [](const CustomPlant& p) { return p.b; },
                      },
                      kind_);
}

double Plant::drift(double x1, double x2, const Eigen::VectorXd& v, double t) const {
    return std::visit(
        overloaded{
            [&](const VdpLike& p) {
                return -x1 * x2 + p.mu1 * x2 * (1.0 - x1 * x1) + p.disturbance_gain * v_at(v, 0);
            },
            [&](const DampingSpring& p) {
                const double v1 = v_at(v, 0), v2 = v_at(v, 1);
                const double d = p.amplitude * v2 * (1.0 - v1 * v1);
                return -(p.kappa1 * x1 + p.kappa2 * x1 * x1 * x1 + p.mu1 * x2 + p.mu2 * x2 * x2 * x2 + d) / p.m;
            },
            [&](const CustomPlant& p) { return p.f(x1, x2, v, t); },
        },
        kind_);
}

std::string Plant::name() const {
    return std::visit(overloaded{
                          [](const VdpLike&) { return std::string("vdp_like"); },
                          [](const DampingSpring&) { return std::string("damping_spring"); },
                          [](const CustomPlant&) { return std::string("custom"); },
                      },
                      kind_);
}

Eigen::Vector2d plant_derivative(const Plant& p, const Eigen::Vector2d& x, const Eigen::VectorXd& v, double u,
                                 double t) {
    return {x(1), p.drift(x(0), x(1), v, t) + p.input_gain() * u};
}

double feedforward_truth(const Plant& p, double s_star, const Eigen::VectorXd& v) {
    if (std::holds_alternative<CustomPlant>(p.kind())) {
        throw Unsupported("feedforward truth is only available for the built-in plants");
    }
    return -p.drift(s_star, 0.0, v, 0.0) / p.input_gain();
}

Plant perturb(const Plant& nominal, double relative, std::mt19937_64& rng) {
    if (relative < 0.0 || relative >= 1.0) {
        throw InvalidArgument("relative perturbation must lie in [0, 1)");
    }
    if (relative == 0.0) return nominal;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto jitter = [&](double x) { return x * (1.0 + relative * unit(rng)); };

    constexpr int max_attempts = 1000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Plant::Kind k = std::visit(overloaded{
                                       [&](const VdpLike& p) -> Plant::Kind {
                                           return VdpLike{jitter(p.mu1), jitter(p.disturbance_gain), jitter(p.b)};
                                       },
                                       [&](const DampingSpring& p) -> Plant::Kind {
                                           return DampingSpring{jitter(p.m),   jitter(p.kappa1), jitter(p.kappa2),
                                                                jitter(p.mu1), jitter(p.mu2),    jitter(p.amplitude)};
                                       },
                                       [&](const CustomPlant& p) -> Plant::Kind { return p; },
                                   },
                                   nominal.kind());
        const bool ok = std::visit(overloaded{
                                       [](const VdpLike& p) { return p.mu1 > 0.0 && p.b > 0.0; },
                                       [](const DampingSpring& p) { return p.m > 0.0; },
                                       [](const CustomPlant&) { return true; },
                                   },
                                   k);
        if (ok) return Plant(std::move(k));
    }
    throw InvalidArgument("could not draw an admissible plant perturbation");
}

Exosystem::Exosystem(Eigen::MatrixXd S_, Eigen::VectorXd v0_) : S(std::move(S_)), v0(std::move(v0_)) {
    if (S.rows() != S.cols() || S.rows() != v0.size()) {
        throw InvalidArgument("exosystem matrix must be square and match the initial state");
    }
}

Exosystem Exosystem::rotation(double sigma, Eigen::Vector2d v0) {
    Eigen::Matrix2d S;
    S << 0.0, sigma, -sigma, 0.0;
    return {S, v0};
}

bool Exosystem::is_skew_symmetric(double tol) const {
    return S.size() == 0 || (S + S.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd exosystem_derivative(const Exosystem& e, const Eigen::VectorXd& v) { return e.S * v; }

Plant example1_plant(int i) {
    const double nominal = static_cast<double>(i);
    return Plant(VdpLike{nominal, nominal, 1.0});
}

Plant example2_plant(int i) {
    const double k = static_cast<double>(i);
    return Plant(DampingSpring{1.0 + 0.1 * k, 2.0 + 0.2 * k, 3.0 - 0.1 * k, 4.0 - 0.2 * k, 5.0 - 0.3 * k, 100.0});
}

}  // namespace ooc
