// nsvc: batch driver for the damped Navier-Stokes-Voigt solver and its
// adjoint-based optimal-control toolkit.
//
// Subcommands: simulate, optimize, verify, gradient-check.
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nsv/config.hpp"
#include "nsv/snapshot.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string output_dir;
    long seed = -1;
    std::vector<std::string> overrides;
    bool corrupt_adjoint = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--output", args.output_dir, "output directory (overrides output.dir)");
    cmd->add_option("--seed", args.seed, "seed (overrides run.seed)");
    cmd->add_option("--override", args.overrides, "section.key=value config override");
}

nsv::RunConfig load(const CommonArgs& args) {
    std::vector<std::string> ov = args.overrides;
    if (!args.output_dir.empty()) ov.push_back("output.dir=" + args.output_dir);
    if (args.seed >= 0) ov.push_back("run.seed=" + std::to_string(args.seed));
    return nsv::load_config(args.config_path, ov);
}

std::string node_name(const char* stem, int n) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%06d.nsvd", stem, n);
    return buf;
}

int cmd_simulate(const CommonArgs& args) {
    const nsv::RunConfig cfg = load(args);
    fs::create_directories(cfg.output_dir);

    nsv::SolverOptions opts;
    opts.scheme = cfg.scheme;
    const nsv::PeriodicGrid grid = cfg.make_grid();
    const nsv::TimeGrid tg = cfg.make_time_grid();
    const nsv::ControlSchedule control = nsv::zero_control(grid, tg);
    const nsv::Trajectory traj = nsv::solve_forward(cfg.make_initial_condition(), control,
                                                    cfg.model, opts);

    std::vector<std::string> artifacts;
    nsv::write_energy_csv(cfg.output_dir + "/energy.csv", nsv::energy_log(traj, control, cfg.model));
    artifacts.push_back("energy.csv");

    if (cfg.snapshot_every > 0) {
        for (int n = 0; n <= tg.steps; ++n) {
            if (n % cfg.snapshot_every != 0 && n != tg.steps) continue;
            const std::string name = node_name("state", n);
            nsv::write_snapshot(cfg.output_dir + "/" + name, nsv::to_physical(traj.states[n]),
                                tg.time(n));
            artifacts.push_back(name);
        }
    }

    {
        std::ofstream out(cfg.output_dir + "/summary.txt");
        out << "status=OK\n";
        out << "steps=" << tg.steps << '\n';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", std::sqrt(nsv::l2_norm_sq(traj.states.back())));
        out << "final_l2=" << buf << '\n';
        artifacts.push_back("summary.txt");
    }
    nsv::write_manifest(cfg.output_dir, artifacts);
    std::printf("simulate: %d steps done, artifacts in %s\n", tg.steps, cfg.output_dir.c_str());
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    const nsv::RunConfig cfg = load(args);
    if (cfg.scheme != nsv::TimeScheme::imex_euler)
        throw nsv::ConfigError("optimize requires time.scheme=imex-euler (discrete adjoint)");
    fs::create_directories(cfg.output_dir);

    const nsv::PeriodicGrid grid = cfg.make_grid();
    const nsv::TimeGrid tg = cfg.make_time_grid();
    const nsv::SpectralField u0 = cfg.make_initial_condition();
    const nsv::CostConfig cost = cfg.make_cost();
    const nsv::BoxConstraints box = cfg.make_box();

    nsv::OptimizeResult res = nsv::optimize(u0, box, cfg.model, cost, cfg.optimizer);

    std::vector<std::string> artifacts;
    nsv::write_iteration_csv(cfg.output_dir + "/iterations.csv", res.log);
    artifacts.push_back("iterations.csv");

    for (int n = 0; n < tg.steps; ++n) {
        const std::string name = node_name("control", n);
        nsv::write_snapshot(cfg.output_dir + "/" + name, res.control.frames[n], tg.time(n));
        artifacts.push_back(name);
    }

    const nsv::GradientResult gr = nsv::reduced_gradient_full(res.control, u0, cfg.model, cost);
    nsv::write_snapshot(cfg.output_dir + "/final_state.nsvd",
                        nsv::to_physical(gr.state.states.back()), tg.horizon);
    artifacts.push_back("final_state.nsvd");
    nsv::write_snapshot(cfg.output_dir + "/initial_costate.nsvd",
                        nsv::to_physical(gr.adjoint.costates[0]), 0.0,
                        nsv::snapshot_magic_adjoint);
    artifacts.push_back("initial_costate.nsvd");

    if (cfg.lambda == 0.0) {
        double phimax = 0.0;
        for (const auto& phi : gr.adjoint.costates)
            phimax = std::max(phimax, nsv::max_abs(nsv::to_physical(phi)));
        const nsv::BangBangField labels =
            nsv::bang_bang_classify(gr.adjoint, box, 1e-3 * phimax);
        std::ofstream out(cfg.output_dir + "/bangbang.csv");
        out << "step,min_bound,max_bound,undetermined\n";
        const std::size_t npts = grid.points();
        for (int n = 0; n < tg.steps; ++n) {
            std::size_t cmin = 0, cmax = 0, cund = 0;
            for (std::size_t i = 0; i < 3 * npts; ++i) {
                switch (labels.labels[n][i]) {
                    case nsv::BangBangLabel::min_bound: ++cmin; break;
                    case nsv::BangBangLabel::max_bound: ++cmax; break;
                    default: ++cund; break;
                }
            }
            out << n << ',' << cmin << ',' << cmax << ',' << cund << '\n';
        }
        artifacts.push_back("bangbang.csv");
    }

    if (cfg.model.r >= 2.0) {
        const nsv::SecondOrderReport soc =
            nsv::second_order_check(res.control, u0, cfg.model, cost, box, 3, cfg.seed + 31);
        res.report.soc_samples = soc.samples;
    }
    // The embedding constants are problem data the global bound needs; no
    // defaults are invented, so the verdict stays UNKNOWN unless supplied.
    res.report.global =
        nsv::global_optimality_diagnostic(gr.adjoint, cfg.model, cfg.kappa, {});

    nsv::write_optimality_report(cfg.output_dir + "/report.txt", res.report);
    artifacts.push_back("report.txt");
    nsv::write_manifest(cfg.output_dir, artifacts);

    std::printf("optimize: status=%s iterations=%d cost=%.6e vi_residual=%.3e\n",
                res.report.status.c_str(), res.report.iterations, res.report.cost,
                res.report.vi_residual);
    return 0;
}

int cmd_verify(const CommonArgs& args, bool quick) {
    const nsv::RunConfig cfg = load(args);
    fs::create_directories(cfg.output_dir);

    nsv::SuiteOptions opts;
    opts.seed = cfg.seed == 0 ? 20240801 : cfg.seed;
    opts.corrupt_adjoint = args.corrupt_adjoint;
    opts.quick = quick;
    opts.on_result = [](const nsv::CheckResult& c) {
        std::printf("%s\n", nsv::format_check_line(c).c_str());
        std::fflush(stdout);
    };
    const std::vector<nsv::CheckResult> checks = nsv::run_property_suite(opts);
    nsv::write_check_report(cfg.output_dir + "/verify_report.txt", checks);

    int failures = 0;
    for (const auto& c : checks)
        if (!c.pass) ++failures;
    if (failures > 0) {
        std::printf("verify: %d of %zu checks FAILED:\n", failures, checks.size());
        for (const auto& c : checks)
            if (!c.pass) std::printf("  FAIL %s\n", nsv::format_check_line(c).c_str());
        return 1;
    }
    std::printf("verify: all %zu checks passed\n", checks.size());
    return 0;
}

int cmd_gradient_check(const CommonArgs& args) {
    const nsv::RunConfig cfg = load(args);
    fs::create_directories(cfg.output_dir);

    const nsv::PeriodicGrid grid = cfg.make_grid();
    const nsv::TimeGrid tg = cfg.make_time_grid();
    const nsv::SpectralField u0 = cfg.make_initial_condition();
    const nsv::CostConfig cost = cfg.make_cost();
    const nsv::ControlSchedule base = nsv::random_control(grid, tg, 0.5, cfg.seed + 1);
    const nsv::ControlSchedule dir = nsv::random_control(grid, tg, 1.0, cfg.seed + 2);
    const std::array<double, 4> eps{1e-1, 1e-2, 1e-3, 1e-4};

    const auto rows = nsv::fd_gradient_oracle(base, u0, cfg.model, cost, dir,
                                              std::span<const double>(eps));
    std::printf("eps            fd_central       central_rem      taylor_rem\n");
    for (const auto& r : rows)
        std::printf("%-14.6e %-16.8e %-16.6e %-16.6e\n", r.eps, r.fd_central,
                    r.central_remainder, r.taylor_remainder);
    std::printf("observed_order(taylor)=%.3f observed_order(central)=%.3f\n",
                nsv::observed_order(rows, true), nsv::observed_order(rows, false));
    nsv::write_remainder_csv(cfg.output_dir + "/gradient_check.csv", rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral damped Navier-Stokes-Voigt solver and control toolkit"};
    app.require_subcommand(1);

    CommonArgs sim_args, opt_args, ver_args, grad_args;
    bool verify_quick = false;

    CLI::App* sim = app.add_subcommand("simulate", "integrate the state equation");
    add_common(sim, sim_args);
    CLI::App* opt = app.add_subcommand("optimize", "solve the box-constrained control problem");
    add_common(opt, opt_args);
    CLI::App* ver = app.add_subcommand("verify", "run the property and identity suite");
    add_common(ver, ver_args);
    ver->add_flag("--quick", verify_quick, "reduced instance sizes");
    ver->add_flag("--corrupt-adjoint", ver_args.corrupt_adjoint,
                  "test hook: flip the adjoint source sign")
        ->group("");  // hidden
    CLI::App* grad = app.add_subcommand("gradient-check", "emit the eps/remainder table");
    add_common(grad, grad_args);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (opt->parsed()) return cmd_optimize(opt_args);
        if (ver->parsed()) return cmd_verify(ver_args, verify_quick);
        if (grad->parsed()) return cmd_gradient_check(grad_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nsv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const nsv::BlowupError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
