#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ooc/coordinator.hpp"
#include "ooc/sim.hpp"

namespace ooc {

/// t, then per agent y_i x2_i yr_i z_i xii_i theta_i k_i psi_i_1..psi_i_s,
/// then v_1..v_nv rho_z exo_norm.
std::vector<std::string> trajectory_header(const StateLayout& layout);

/// One row per sample in trajectory_header column order.
Eigen::MatrixXd trajectory_table(const Trajectory& traj);

/// CSV with 17 significant digits per value. Throws InvalidArgument for an
/// empty trajectory and IoError when the file cannot be written.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory(const Trajectory& traj, const std::string& path);

/// t, then yr_i, z_i, xii_i per agent.
void write_coordinator_csv(const CoordinatorTrajectory& traj, std::ostream& out);
void write_coordinator_trajectory(const CoordinatorTrajectory& traj, const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

nlohmann::json metrics_json(const Metrics& m, double s_star);
nlohmann::json report_json(const VerificationReport& r);

void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace ooc
