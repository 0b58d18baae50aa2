#include "ooc/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ooc/errors.hpp"

namespace ooc {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

template <class Row>
void write_row(std::ostream& out, const Row& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << fmt(values[k]);
    out << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<std::string> trajectory_header(const StateLayout& layout) {
    std::vector<std::string> h{"t"};
    for (std::size_t i = 0; i < layout.agents(); ++i) {
        const auto a = std::to_string(i + 1);
        for (const char* name : {"y_", "x2_", "yr_", "z_", "xii_", "theta_", "k_"}) h.push_back(name + a);
        for (std::size_t k = 0; k < layout.order(i); ++k) h.push_back("psi_" + a + "_" + std::to_string(k + 1));
    }
    for (std::size_t k = 0; k < layout.exo_dim(); ++k) h.push_back("v_" + std::to_string(k + 1));
    h.push_back("rho_z");
    h.push_back("exo_norm");
    return h;
}

Eigen::MatrixXd trajectory_table(const Trajectory& traj) {
    const auto& L = traj.layout;
    const auto cols = static_cast<Eigen::Index>(trajectory_header(L).size());
    Eigen::MatrixXd table(static_cast<Eigen::Index>(traj.size()), cols);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& s = traj.samples[k];
        const auto r = static_cast<Eigen::Index>(k);
        Eigen::Index c = 0;
        table(r, c++) = traj.times[k];
        for (std::size_t i = 0; i < L.agents(); ++i) {
            table(r, c++) = s(L.x1(i));
            table(r, c++) = s(L.x2(i));
            table(r, c++) = s(L.y_r(i));
            table(r, c++) = s(L.z(i));
            table(r, c++) = s(L.xi(i, i));
            table(r, c++) = traj.theta[k](static_cast<Eigen::Index>(i));
            table(r, c++) = s(L.k_gain(i));
            for (std::size_t j = 0; j < L.order(i); ++j) table(r, c++) = s(L.psi(i) + static_cast<Eigen::Index>(j));
        }
        for (std::size_t j = 0; j < L.exo_dim(); ++j) table(r, c++) = s(L.v() + static_cast<Eigen::Index>(j));
        table(r, c++) = traj.rho_z[k];
        table(r, c++) = traj.exo_norm[k];
    }
    return table;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    if (traj.size() == 0) throw InvalidArgument("cannot write a trajectory without samples");
    const auto header = trajectory_header(traj.layout);
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    const Eigen::MatrixXd table = trajectory_table(traj);
    for (Eigen::Index r = 0; r < table.rows(); ++r) write_row(out, table.row(r));
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
    if (traj.size() == 0) throw InvalidArgument("cannot write a trajectory without samples");
    auto out = open_out(path);
    write_trajectory_csv(traj, out);
    close_out(out, path);
}

void write_coordinator_csv(const CoordinatorTrajectory& traj, std::ostream& out) {
    if (traj.samples.empty()) throw InvalidArgument("cannot write a trajectory without samples");
    const auto n = traj.samples.front().y_r.size();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",yr_" << i << ",z_" << i << ",xii_" << i;
    out << '\n';
    std::vector<double> row;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const auto& s = traj.samples[k];
        row.assign({traj.times[k]});
        for (Eigen::Index i = 0; i < n; ++i) {
            row.push_back(s.y_r(i));
            row.push_back(s.z(i));
            row.push_back(s.xi(i, i));
        }
        write_row(out, row);
    }
}

void write_coordinator_trajectory(const CoordinatorTrajectory& traj, const std::string& path) {
    if (traj.samples.empty()) throw InvalidArgument("cannot write a trajectory without samples");
    auto out = open_out(path);
    write_coordinator_csv(traj, out);
    close_out(out, path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    CsvTable t;
    std::string line, cell;
    if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
    for (std::stringstream ss(line); std::getline(ss, cell, ',');) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto& row = t.rows.emplace_back();
        for (std::stringstream ss(line); std::getline(ss, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != t.header.size()) throw IoError("'" + path + "': row width differs from header");
    }
    return t;
}

json metrics_json(const Metrics& m, double s_star) {
    json agents = json::array();
    for (const auto& a : m.agents) {
        agents.push_back({{"final_error", a.final_error},
                          {"settling_time", finite_or_null(a.settling_time)},
                          {"max_gain", a.max_gain},
                          {"final_gain", a.final_gain}});
    }
    return {{"s_star", s_star}, {"max_final_error", m.max_final_error}, {"agents", agents}};
}

json report_json(const VerificationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name}, {"value", finite_or_null(c.value)}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    }
    json j = {{"passed", r.passed()},
              {"s_star", r.s_star},
              {"final_output_error", r.final_output_error},
              {"velocity_error", r.velocity_error},
              {"xi_error", r.xi_error},
              {"z_conservation_drift", r.z_conservation_drift},
              {"xi_rowsum_drift", r.xi_rowsum_drift},
              {"sylvester_residuals", r.sylvester_residuals},
              {"k_monotone", r.k_monotone},
              {"checks", checks}};
    j["exo_energy_drift"] = r.exo_energy_drift ? json(*r.exo_energy_drift) : json(nullptr);
    j["psi_error"] = r.psi_error ? json(*r.psi_error) : json(nullptr);
    if (r.psi_target) {
        j["psi_target"] = std::vector<double>(r.psi_target->data(), r.psi_target->data() + r.psi_target->size());
    } else {
        j["psi_target"] = nullptr;
    }
    return j;
}

void write_json(const json& j, const std::string& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    close_out(out, path);
}

}  // namespace ooc
