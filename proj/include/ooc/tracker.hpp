#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ooc {

// Controller-side internal model eta' = M eta + N u.
struct InternalModel {
    Eigen::MatrixXd M;
    Eigen::VectorXd N;

    std::size_t order() const noexcept { return static_cast<std::size_t>(M.rows()); }
};

/// Bottom-row companion matrix whose last row is -coeffs (constant term
/// first) and N = e_s. Throws NotHurwitz unless every eigenvalue has real
/// part below -1e-9; throws InvalidArgument if (M, N) is not controllable.
InternalModel companion_pair(std::size_t s_dim, std::span<const double> char_coeffs);

bool is_hurwitz(const Eigen::MatrixXd& M, double tol = 1e-9);
bool is_controllable(const Eigen::MatrixXd& M, const Eigen::VectorXd& N);

// Steady-state generator of the feedforward, known to the verification
// harness only.
struct FeedforwardModel {
    Eigen::MatrixXd Phi;
    Eigen::RowVectorXd Gamma;
};

/// Companion (Phi, Gamma) whose characteristic roots are {0} for a zero
/// frequency and {+-j w} for each w > 0. Throws DegenerateRoots on repeats.
FeedforwardModel phi_gamma(std::span<const double> frequencies);

/// Solves T Phi - M T = N Gamma through the Kronecker-vectorized system
/// (Phi^T (x) I - I (x) M) vec(T) = vec(N Gamma). Throws SingularSystem
/// when the spectra of Phi and M (numerically) overlap.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& M, const Eigen::VectorXd& N, const Eigen::MatrixXd& Phi,
                                const Eigen::RowVectorXd& Gamma);

double sylvester_residual(const Eigen::MatrixXd& T, const Eigen::MatrixXd& M, const Eigen::VectorXd& N,
                          const Eigen::MatrixXd& Phi, const Eigen::RowVectorXd& Gamma);

/// Gamma T^{-1}; Gamma defaults to the first unit row. Throws SingularT.
Eigen::RowVectorXd psi_true(const Eigen::MatrixXd& T);
Eigen::RowVectorXd psi_true(const Eigen::MatrixXd& T, const Eigen::RowVectorXd& Gamma);

/// rho(theta) = 1 + coeff |theta|^power, which is >= 1 for coeff >= 0.
struct GainShape {
    double coeff = 1.0;
    double power = 4.0;

    double operator()(double theta) const;
};

struct TrackerParams {
    double gamma = 2.0;
    GainShape rho{};

    void validate() const;
};

struct TrackerState {
    Eigen::VectorXd eta;
    double k_gain = 0.0;
    Eigen::RowVectorXd psi_hat;

    static TrackerState zero(std::size_t order);
};

struct TrackerDerivative {
    Eigen::VectorXd eta;
    double k_gain;
    Eigen::RowVectorXd psi_hat;
};

/// Filtered tracking error x2 + gamma (x1 - y_r).
double vartheta(const Eigen::Vector2d& x, double y_r, double gamma);

/// -k rho(theta) theta + psi_hat eta. With include_feedforward = false the
/// internal-model term is dropped.
double control(const TrackerState& ts, double theta, const TrackerParams& params, bool include_feedforward = true);

/// (M eta + N u, rho(theta) theta^2, -eta^T theta)
TrackerDerivative tracker_derivative(const TrackerState& ts, double theta, double u, const TrackerParams& params,
                                     const InternalModel& im);

}  // namespace ooc
