#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ooc/coordinator.hpp"
#include "ooc/costs.hpp"
#include "ooc/digraph.hpp"
#include "ooc/plant.hpp"
#include "ooc/tracker.hpp"

namespace ooc {

struct InitialConditions {
    Interval x_range{-2.0, 2.0};   // each of x1, x2
    Interval yr_range{-5.0, 5.0};  // coordinator references
    double tracker_range = 0.0;    // 0: eta = 0, k = 0, psi_hat = 0
    std::optional<Eigen::VectorXd> y_r;           // overrides yr_range
    std::optional<std::vector<Eigen::Vector2d>> x;  // overrides x_range
};

struct Tolerances {
    double output = 5e-2;     // max_i |y_i(T) - s*|
    double velocity = 5e-2;   // max_i |x_i2(t)| for t >= velocity_from
    double velocity_from = -1.0;  // negative: final sample only
    double xi = 1e-6;
    double z_drift = 1e-8;
    double rowsum_drift = 1e-9;
    double exo_drift = 1e-8;
    double sylvester = 1e-10;
    std::optional<double> psi;  // parameter-convergence check, opt-in
};

struct Scenario {
    std::string name = "custom";
    std::uint64_t seed = 0;

    Digraph graph{2, {{0, 1, 1.0}, {1, 0, 1.0}}};
    std::vector<CostFunction> costs;
    Interval cost_domain{-10.0, 10.0};

    std::vector<Plant> plants;       // nominal plants
    double plant_uncertainty = 0.0;  // seeded relative perturbation
    Exosystem exo{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};

    std::optional<CoordinatorGains> gains;  // empty: select automatically
    double gain_margin = 2.0;

    TrackerParams tracker{};
    std::vector<InternalModel> models;
    std::vector<double> truth_frequencies;  // verification harness only

    InitialConditions init{};
    double horizon = 100.0;
    double step = 1e-3;
    std::size_t record_every = 100;
    bool ablate_internal_model = false;
    // Stability guard: substeps keep h_sub * stiffness_bound <= courant.
    // courant = 0 integrates with plain fixed steps.
    double courant = 1.0;
    std::size_t max_substeps = 1'000'000;
    Tolerances tol{};

    std::size_t agents() const noexcept { return graph.size(); }
    void validate() const;
};

/// Gains from the scenario, or the automatic rule fed by convexity bounds on
/// cost_domain and the graph spectrum.
CoordinatorGains resolve_gains(const Scenario& sc);

// Offsets of every block inside the flat closed-loop state vector:
// [y_r (n) | z (n) | xi (n*n, row-major) | per agent: x1 x2 eta(s_i) k psi(s_i) | v]
class StateLayout {
public:
    StateLayout(std::size_t agents, std::vector<std::size_t> orders, std::size_t exo_dim);

    std::size_t agents() const noexcept { return n_; }
    std::size_t order(std::size_t i) const { return orders_[i]; }
    std::size_t exo_dim() const noexcept { return nv_; }
    Eigen::Index size() const noexcept { return size_; }

    Eigen::Index y_r(std::size_t i) const { return idx(i); }
    Eigen::Index z(std::size_t i) const { return idx(n_ + i); }
    Eigen::Index xi(std::size_t i, std::size_t k) const { return idx(2 * n_ + i * n_ + k); }
    Eigen::Index x1(std::size_t i) const { return base_[i]; }
    Eigen::Index x2(std::size_t i) const { return base_[i] + 1; }
    Eigen::Index eta(std::size_t i) const { return base_[i] + 2; }
    Eigen::Index k_gain(std::size_t i) const { return base_[i] + 2 + idx(orders_[i]); }
    Eigen::Index psi(std::size_t i) const { return k_gain(i) + 1; }
    Eigen::Index v() const { return v_; }

    CoordinatorState coordinator(const Eigen::VectorXd& s) const;
    void set_coordinator(Eigen::VectorXd& s, const CoordinatorState& c) const;
    TrackerState tracker(const Eigen::VectorXd& s, std::size_t i) const;
    Eigen::Vector2d x(const Eigen::VectorXd& s, std::size_t i) const { return s.segment<2>(x1(i)); }
    Eigen::VectorXd exo(const Eigen::VectorXd& s) const { return s.segment(v_, idx(nv_)); }

private:
    static Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

    std::size_t n_, nv_;
    std::vector<std::size_t> orders_;
    std::vector<Eigen::Index> base_;
    Eigen::Index v_, size_;
};

// Full closed-loop state; values are laid out by a StateLayout.
struct SystemState {
    Eigen::VectorXd values;
};

/// Assembled closed loop: coordinator, adaptive trackers, plants, exosystem.
class System {
public:
    explicit System(const Scenario& sc);

    const StateLayout& layout() const noexcept { return layout_; }
    const CoordinatorGains& gains() const noexcept { return gains_; }
    const std::vector<Plant>& plants() const noexcept { return plants_; }

    SystemState initial_state() const;
    Eigen::VectorXd derivative(double t, const Eigen::VectorXd& state) const;

    /// Per-agent filtered tracking errors at a state.
    Eigen::VectorXd thetas(const Eigen::VectorXd& state) const;
    /// Per-agent control inputs at a state.
    Eigen::VectorXd inputs(const Eigen::VectorXd& state) const;

    /// Upper bound on the spectral radius of the local Jacobian, from the
    /// gains, curvatures, adaptive gains and plant partials at `state`.
    double stiffness_bound(const Eigen::VectorXd& state) const;

private:
    Digraph graph_;
    std::vector<CostFunction> costs_;
    std::vector<Plant> plants_;
    Exosystem exo_;
    CoordinatorGains gains_;
    TrackerParams tracker_;
    std::vector<InternalModel> models_;
    bool ablate_;
    StateLayout layout_;
    std::uint64_t seed_;
    InitialConditions init_;
};

/// Builds the closed loop. Throws NotStronglyConnected, NotHurwitz, and the
/// construction errors of the component modules.
System assemble(const Scenario& sc);

/// One RK4 step of the full coupled ODE; throws Diverged on non-finite output.
SystemState rk4_step(const System& system, const SystemState& state, double t, double h);

/// Advances by h using m equal RK4 substeps, m = ceil(h * stiffness / courant)
/// (at least 1). Returns the substep count used.
std::size_t guarded_step(const System& system, SystemState& state, double t, double h, double courant,
                         std::size_t max_substeps);

struct Trajectory {
    StateLayout layout;
    double s_star = 0.0;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> samples;

    // Derived per-sample diagnostics.
    std::vector<Eigen::VectorXd> theta;
    std::vector<double> rho_z;       // rho^T z
    std::vector<double> exo_norm;    // ||v||
    std::vector<double> xi_rowsum_drift;  // max_i |sum_k xi_i^k - 1|

    std::size_t max_substeps_used = 1;
    std::size_t total_substeps = 0;

    std::size_t size() const noexcept { return times.size(); }
    double output(std::size_t sample, std::size_t agent) const { return samples[sample](layout.x1(agent)); }
    double velocity(std::size_t sample, std::size_t agent) const { return samples[sample](layout.x2(agent)); }
};

Trajectory run(const Scenario& sc);

struct AgentMetrics {
    double final_error;
    double settling_time;  // +inf when never settled within 0.02
    double max_gain;
    double final_gain;
};

struct Metrics {
    std::vector<AgentMetrics> agents;
    double max_final_error;
};

Metrics metrics(const Trajectory& traj, double s_star);

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool passed;
};

struct VerificationReport {
    double s_star = 0.0;
    double final_output_error = 0.0;
    double velocity_error = 0.0;
    double xi_error = 0.0;
    double z_conservation_drift = 0.0;
    double xi_rowsum_drift = 0.0;
    std::optional<double> exo_energy_drift;   // only for skew-symmetric S
    std::vector<double> sylvester_residuals;  // empty without truth frequencies
    std::optional<double> psi_error;
    std::optional<Eigen::RowVectorXd> psi_target;
    bool k_monotone = true;
    std::vector<Check> checks;

    bool passed() const;
};

/// Compares a trajectory against the independent oracles: bisection optimum,
/// left-eigenvector solve, Sylvester truth, and the conservation laws.
VerificationReport verify(const Scenario& sc, const Trajectory& traj);

struct SweepResult {
    double value;
    std::optional<VerificationReport> report;
    std::string error;
};

/// Names accepted by sweep: beta1, beta2, gain_margin, gamma, rho_coeff,
/// step, horizon, seed, plant_uncertainty.
void set_scalar_field(Scenario& sc, std::string_view field, double value);

/// Runs and verifies one scenario per value on a bounded worker pool.
std::vector<SweepResult> sweep(const Scenario& base, std::string_view field, std::span<const double> values,
                               std::size_t workers = 0);

}  // namespace ooc
