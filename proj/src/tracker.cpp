#include "ooc/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "ooc/errors.hpp"

namespace ooc {

bool is_hurwitz(const Eigen::MatrixXd& M, double tol) {
    if (M.size() == 0) return true;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    return (es.eigenvalues().real().array() < -tol).all();
}

bool is_controllable(const Eigen::MatrixXd& M, const Eigen::VectorXd& N) {
    const auto s = M.rows();
    Eigen::MatrixXd C(s, s);
    Eigen::VectorXd col = N;
    for (Eigen::Index k = 0; k < s; ++k) {
        C.col(k) = col;
        col = M * col;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
    return qr.rank() == s;
}

InternalModel companion_pair(std::size_t s_dim, std::span<const double> char_coeffs) {
    if (s_dim == 0 || char_coeffs.size() != s_dim) {
        throw InvalidArgument("companion pair needs s_dim >= 1 coefficients, got " + std::to_string(char_coeffs.size()) +
                              " for s_dim = " + std::to_string(s_dim));
    }
    const auto s = static_cast<Eigen::Index>(s_dim);
    InternalModel im{Eigen::MatrixXd::Zero(s, s), Eigen::VectorXd::Zero(s)};
    for (Eigen::Index r = 0; r + 1 < s; ++r) im.M(r, r + 1) = 1.0;
    for (Eigen::Index c = 0; c < s; ++c) im.M(s - 1, c) = -char_coeffs[static_cast<std::size_t>(c)];
    im.N(s - 1) = 1.0;

    if (!is_hurwitz(im.M)) {
        throw NotHurwitz("internal-model matrix M is not Hurwitz");
    }
    if (!is_controllable(im.M, im.N)) {
        throw InvalidArgument("(M, N) is not controllable");
    }
    return im;
}

FeedforwardModel phi_gamma(std::span<const double> frequencies) {
    if (frequencies.empty()) {
        throw InvalidArgument("phi_gamma needs at least one frequency");
    }
    std::vector<double> sorted(frequencies.begin(), frequencies.end());
    for (double w : sorted) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("frequencies must be finite and nonnegative");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DegenerateRoots("repeated frequency in internal-model mode list");
    }

    // Monic polynomial coefficients, constant term first.
    std::vector<double> poly{1.0};
    auto multiply = [&](std::span<const double> factor) {
        std::vector<double> out(poly.size() + factor.size() - 1, 0.0);
        for (std::size_t a = 0; a < poly.size(); ++a)
            for (std::size_t b = 0; b < factor.size(); ++b) out[a + b] += poly[a] * factor[b];
        poly = std::move(out);
    };
    for (double w : sorted) {
        if (w == 0.0) {
            const double f[] = {0.0, 1.0};
            multiply(f);
        } else {
            const double f[] = {w * w, 0.0, 1.0};
            multiply(f);
        }
    }

    const auto s = static_cast<Eigen::Index>(poly.size() - 1);
    FeedforwardModel ff{Eigen::MatrixXd::Zero(s, s), Eigen::RowVectorXd::Zero(s)};
    for (Eigen::Index r = 0; r + 1 < s; ++r) ff.Phi(r, r + 1) = 1.0;
    for (Eigen::Index c = 0; c < s; ++c) ff.Phi(s - 1, c) = -poly[static_cast<std::size_t>(c)];
    ff.Gamma(0) = 1.0;
    return ff;
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& M, const Eigen::VectorXd& N, const Eigen::MatrixXd& Phi,
                                const Eigen::RowVectorXd& Gamma) {
    const auto s = M.rows();
    const auto q = Phi.rows();
    if (M.cols() != s || N.size() != s || Phi.cols() != q || Gamma.size() != q) {
        throw InvalidArgument("solve_sylvester: inconsistent dimensions");
    }
    // Column-major vec: vec(T Phi) = (Phi^T (x) I_s) vec T, vec(M T) = (I_q (x) M) vec T.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s * q, s * q);
    for (Eigen::Index a = 0; a < q; ++a) {
        for (Eigen::Index b = 0; b < q; ++b) {
            K.block(a * s, b * s, s, s).diagonal().setConstant(Phi(b, a));
        }
        K.block(a * s, a * s, s, s) -= M;
    }
    const Eigen::MatrixXd rhs = N * Gamma;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw SingularSystem("Sylvester operator is singular: spectra of M and Phi overlap");
    }
    Eigen::VectorXd vecT = lu.solve(rhs.reshaped());
    return vecT.reshaped(s, q);
}

double sylvester_residual(const Eigen::MatrixXd& T, const Eigen::MatrixXd& M, const Eigen::VectorXd& N,
                          const Eigen::MatrixXd& Phi, const Eigen::RowVectorXd& Gamma) {
    return (T * Phi - M * T - N * Gamma).norm();
}

Eigen::RowVectorXd psi_true(const Eigen::MatrixXd& T) {
    Eigen::RowVectorXd Gamma = Eigen::RowVectorXd::Zero(T.cols());
    if (T.cols() > 0) Gamma(0) = 1.0;
    return psi_true(T, Gamma);
}

Eigen::RowVectorXd psi_true(const Eigen::MatrixXd& T, const Eigen::RowVectorXd& Gamma) {
    if (T.rows() != T.cols() || Gamma.size() != T.rows()) {
        throw SingularT("T must be square and match Gamma");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
    if (!lu.isInvertible()) {
        throw SingularT("Sylvester solution T is singular");
    }
    return Gamma * lu.inverse();
}

double GainShape::operator()(double theta) const { return 1.0 + coeff * std::pow(std::abs(theta), power); }

void TrackerParams::validate() const {
    if (!(gamma >= 1.5)) {
        throw InvalidArgument("tracker gamma must be at least 1.5, got " + std::to_string(gamma));
    }
    if (!(rho.coeff >= 0.0) || !(rho.power >= 0.0)) {
        throw InvalidArgument("gain shape needs coeff >= 0 and power >= 0");
    }
}

TrackerState TrackerState::zero(std::size_t order) {
    const auto s = static_cast<Eigen::Index>(order);
    return {Eigen::VectorXd::Zero(s), 0.0, Eigen::RowVectorXd::Zero(s)};
}

double vartheta(const Eigen::Vector2d& x, double y_r, double gamma) { return x(1) + gamma * (x(0) - y_r); }

double control(const TrackerState& ts, double theta, const TrackerParams& params, bool include_feedforward) {
    const double u = -ts.k_gain * params.rho(theta) * theta;
    return include_feedforward ? u + ts.psi_hat.dot(ts.eta) : u;
}

TrackerDerivative tracker_derivative(const TrackerState& ts, double theta, double u, const TrackerParams& params,
                                     const InternalModel& im) {
    return {im.M * ts.eta + im.N * u, params.rho(theta) * theta * theta, -ts.eta.transpose() * theta};
}

}  // namespace ooc
