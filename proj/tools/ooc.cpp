// ooc: run, verify and inspect optimal output consensus scenarios.
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ooc/errors.hpp"
#include "ooc/scenario_io.hpp"
#include "ooc/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, check_failed = 1, usage = 2 };

// Thrown for failures that belong to the scenario rather than the run.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string scenario;
    std::string out = "out";
    std::vector<std::string> overrides;  // field=value
};

ooc::Scenario load(const Common& c) {
    ooc::Scenario sc;
    try {
        sc = ooc::load_scenario(c.scenario, &std::cerr);
        for (const auto& kv : c.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ooc::InvalidArgument("--set expects field=value, got '" + kv + "'");
            ooc::set_scalar_field(sc, kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
        }
        sc.validate();
    } catch (const std::invalid_argument&) {
        throw LoadError("--set value is not a number");
    } catch (const ooc::Error& e) {
        throw LoadError(e.what());
    }
    return sc;
}

std::string out_dir(const Common& c) {
    fs::create_directories(c.out);
    return c.out;
}

void print_checks(const ooc::VerificationReport& r) {
    for (const auto& c : r.checks) {
        std::cout << (c.passed ? "  ok    " : "  FAIL  ") << std::left << std::setw(24) << c.name << std::right
                  << std::setprecision(6) << c.value << " (tol " << c.tolerance << ")\n";
    }
}

int cmd_sim(const Common& c) {
    const auto sc = load(c);
    const auto dir = out_dir(c);
    const auto traj = ooc::run(sc);
    const double s_star = ooc::global_optimum(sc.costs);
    const auto m = ooc::metrics(traj, s_star);
    ooc::write_trajectory(traj, dir + "/trajectory.csv");
    ooc::write_json(ooc::metrics_json(m, s_star), dir + "/metrics.json");
    std::cout << "s* = " << std::setprecision(10) << s_star << ", max final error = " << m.max_final_error << "\n"
              << "wrote " << dir << "/trajectory.csv (" << traj.size() << " samples)\n";
    return ok;
}

int cmd_verify(const Common& c) {
    const auto sc = load(c);
    const auto dir = out_dir(c);
    const auto traj = ooc::run(sc);
    const auto r = ooc::verify(sc, traj);
    ooc::write_trajectory(traj, dir + "/trajectory.csv");
    ooc::write_json(ooc::metrics_json(ooc::metrics(traj, r.s_star), r.s_star), dir + "/metrics.json");
    ooc::write_json(ooc::report_json(r), dir + "/report.json");
    std::cout << "scenario " << sc.name << ": s* = " << std::setprecision(10) << r.s_star << "\n";
    print_checks(r);
    if (r.psi_error && !sc.tol.psi) std::cout << "  info  psi_error " << *r.psi_error << " (not checked)\n";
    std::cout << (r.passed() ? "PASSED" : "FAILED") << "\n";
    return r.passed() ? ok : check_failed;
}

int cmd_coordinator(const Common& c) {
    const auto sc = load(c);
    const auto dir = out_dir(c);
    const auto gains = ooc::resolve_gains(sc);
    const ooc::System sys(sc);
    const auto y0 = sys.layout().coordinator(sys.initial_state().values).y_r;
    const auto traj = ooc::coordinator_only_run(sc.graph, sc.costs, gains, y0, sc.horizon, sc.step, sc.record_every,
                                                sc.courant);
    ooc::write_coordinator_trajectory(traj, dir + "/coordinator.csv");
    const double s_star = ooc::global_optimum(sc.costs);
    const auto rho = ooc::left_eigenvector(sc.graph);
    const auto& f = traj.final_state();
    const double err = (f.y_r.array() - s_star).abs().maxCoeff();
    const double xi_err = (f.xi.diagonal() - rho).cwiseAbs().maxCoeff();
    ooc::write_json({{"s_star", s_star},
                     {"beta1", gains.beta1},
                     {"beta2", gains.beta2},
                     {"final_reference_error", err},
                     {"xi_error", xi_err}},
                    dir + "/coordinator.json");
    std::cout << std::setprecision(10) << "s* = " << s_star << "\nmax |yr(T) - s*| = " << err
              << "\nmax |xi_ii(T) - rho_i| = " << xi_err << "\n";
    return ok;
}

int cmd_graph(const Common& c) {
    ooc::Scenario sc;
    try {
        sc = ooc::load_scenario(c.scenario, nullptr);
    } catch (const ooc::NotStronglyConnected& e) {
        // raised while resolving auto gains
        std::cout << "strongly connected: no\n";
        std::cerr << e.what() << "\n";
        return check_failed;
    } catch (const ooc::Error& e) {
        throw LoadError(e.what());
    }
    const bool connected = ooc::is_strongly_connected(sc.graph);
    std::cout << "nodes: " << sc.graph.size() << "\nstrongly connected: " << (connected ? "yes" : "no") << "\n";
    if (!connected) return check_failed;
    const auto sd = ooc::spectral_data(sc.graph);
    std::cout << std::setprecision(12) << "rho: [";
    for (Eigen::Index i = 0; i < sd.rho.size(); ++i) std::cout << (i ? ", " : "") << sd.rho(i);
    std::cout << "]\nrho_min: " << sd.rho_min << "\nlambda2: " << sd.lambda2 << "\n";
    return ok;
}

int cmd_ablate(const Common& c) {
    auto sc = load(c);
    const auto dir = out_dir(c);
    sc.ablate_internal_model = false;
    const auto with = ooc::run(sc);
    sc.ablate_internal_model = true;
    const auto without = ooc::run(sc);
    const double s_star = ooc::global_optimum(sc.costs);
    const auto mw = ooc::metrics(with, s_star), mo = ooc::metrics(without, s_star);
    fs::create_directories(dir + "/with_internal_model");
    fs::create_directories(dir + "/without_internal_model");
    ooc::write_trajectory(with, dir + "/with_internal_model/trajectory.csv");
    ooc::write_trajectory(without, dir + "/without_internal_model/trajectory.csv");
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mw.agents.size(); ++i) {
        min_ratio = std::min(min_ratio, mo.agents[i].final_error / mw.agents[i].final_error);
    }
    const bool ordered = mw.max_final_error < mo.max_final_error;
    ooc::write_json({{"s_star", s_star},
                     {"with_internal_model", ooc::metrics_json(mw, s_star)},
                     {"without_internal_model", ooc::metrics_json(mo, s_star)},
                     {"min_error_ratio", min_ratio},
                     {"ordered", ordered}},
                    dir + "/ablation.json");
    std::cout << std::setprecision(6) << "max final error with internal model:    " << mw.max_final_error
              << "\nmax final error without internal model: " << mo.max_final_error
              << "\nsmallest per-agent ratio: " << min_ratio << "\n";
    return ordered ? ok : check_failed;
}

int cmd_sweep(const Common& c, const std::string& field, const std::vector<double>& values, std::size_t workers) {
    const auto sc = load(c);
    const auto dir = out_dir(c);
    const auto results = ooc::sweep(sc, field, values, workers);
    json rows = json::array();
    bool all = true;
    for (const auto& r : results) {
        json row = {{"value", r.value}};
        if (r.report) {
            row["report"] = ooc::report_json(*r.report);
            all = all && r.report->passed();
            std::cout << field << " = " << r.value << ": " << (r.report->passed() ? "passed" : "failed")
                      << ", final error " << r.report->final_output_error << "\n";
        } else {
            row["error"] = r.error;
            all = false;
            std::cout << field << " = " << r.value << ": error: " << r.error << "\n";
        }
        rows.push_back(row);
    }
    ooc::write_json({{"field", field}, {"results", rows}}, dir + "/sweep.json");
    return all ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed optimal output consensus simulator"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--scenario,-s", common.scenario, "preset name (example1, example2) or JSON file")->required();
        if (with_out) {
            sub->add_option("--out,-o", common.out, "output directory")->capture_default_str();
            sub->add_option("--set", common.overrides, "override a scalar field, e.g. --set seed=3");
        }
    };
    auto* sim = app.add_subcommand("sim", "run the closed loop and write trajectory.csv and metrics.json");
    add_common(sim, true);
    auto* coord = app.add_subcommand("coordinator", "run the coordinator alone");
    add_common(coord, true);
    auto* graph = app.add_subcommand("graph", "print connectivity, rho and lambda2");
    add_common(graph, false);
    auto* ver = app.add_subcommand("verify", "run and check against the oracles; exit 1 on any failed check");
    add_common(ver, true);
    auto* abl = app.add_subcommand("ablate", "paired run with and without the internal model");
    add_common(abl, true);
    auto* swp = app.add_subcommand("sweep", "vary one scalar field and verify each run");
    add_common(swp, true);
    std::string field;
    std::vector<double> values;
    std::size_t workers = 0;
    swp->add_option("--field", field, "beta1, beta2, gain_margin, gamma, rho_coeff, step, horizon, seed, plant_uncertainty")
        ->required();
    swp->add_option("--values", values, "grid of values")->required()->delimiter(',');
    swp->add_option("--workers", workers, "worker threads (0: hardware concurrency)");

    auto* pre = app.add_subcommand("preset", "print a built-in scenario as JSON");
    std::string preset_name;
    pre->add_option("name", preset_name, "example1 or example2")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*pre) {
            try {
                std::cout << ooc::preset_json(preset_name).dump(2) << "\n";
            } catch (const ooc::InvalidArgument& e) {
                throw LoadError(e.what());
            }
            return ok;
        }
        if (*sim) return cmd_sim(common);
        if (*coord) return cmd_coordinator(common);
        if (*graph) return cmd_graph(common);
        if (*ver) return cmd_verify(common);
        if (*abl) return cmd_ablate(common);
        if (*swp) return cmd_sweep(common, field, values, workers);
    } catch (const LoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const ooc::Diverged& e) {
        std::cerr << "run diverged at t = " << e.time() << ": " << e.what() << "\n";
        return check_failed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return check_failed;
    }
    return usage;
}
