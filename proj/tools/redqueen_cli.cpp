/// Command-line driver: wires plain-text configs to simulation runs,
/// post-hoc trajectory analysis, the verification suites, and parameter
/// sweeps.  Every command writes self-describing artifacts (a manifest
/// echoing the fully resolved configuration plus CSV data and a standalone
/// plot script) and reruns are byte-identical.
///
/// Exit codes: 0 success, 1 verification failure or infeasible model,
/// 2 usage or configuration error, 3 numeric failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "redqueen/config.hpp"
#include "redqueen/diagnostics.hpp"
#include "redqueen/errors.hpp"
#include "redqueen/io.hpp"
#include "redqueen/solver.hpp"
#include "redqueen/verify.hpp"

namespace {

using namespace redqueen;
namespace fs = std::filesystem;

// ------------------------------------------------------------------------
// Output locations.

/// Root for relative output directories: REDQUEEN_OUT or the working dir.
fs::path output_root() {
    const char* env = std::getenv("REDQUEEN_OUT");
    return env && *env ? fs::path(env) : fs::path(".");
}

/// --out overrides the directory wholesale; otherwise the config's own
/// output name is placed under the output root.
fs::path resolve_out_dir(const std::string& out_flag, const std::string& config_name) {
    return out_flag.empty() ? output_root() / config_name : fs::path(out_flag);
}

// ------------------------------------------------------------------------
// Plot scripts.  Emitted next to the data they read so every run directory
// is reproducible without the binary; rendering stays out of the core.

const char* const kPlotRunScript = R"PY(#!/usr/bin/env python3
"""Plot one run directory: masses over time, mean-trait paths, and the
final host/pathogen snapshot.

Usage: python3 plot_run.py [run_dir]   (default: the script's directory)
Reads manifest.json, trajectory.csv and the last snapshot CSV; writes
plots.png into the run directory.  Needs matplotlib and numpy.
"""
import csv
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

run = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(run, "manifest.json")) as f:
    manifest = json.load(f)
n = manifest["model"]["n"]
grid = manifest["grid"]

# Scalar observables: one row per sample time.
rows = list(csv.DictReader(open(os.path.join(run, "trajectory.csv"))))
if not rows:
    print("trajectory.csv has no samples (summary-only run); nothing to plot")
    sys.exit(0)
t = np.array([float(r["t"]) for r in rows])
H = np.array([float(r["H"]) for r in rows])
P = np.array([float(r["P"]) for r in rows])

fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))

# Panel 1: total masses.
axes[0].plot(t, H, label="host mass H")
axes[0].plot(t, P, label="pathogen mass P")
axes[0].set_xlabel("t")
axes[0].legend()
axes[0].set_title("population masses")

# Panel 2: mean-trait paths (the pursuit shows as the pathogen mean
# trailing the host mean).
if n == 2:
    xb = np.array([[float(r["xbar1"]), float(r["xbar2"])] for r in rows])
    yb = np.array([[float(r["ybar1"]), float(r["ybar2"])] for r in rows])
    axes[1].plot(xb[:, 0], xb[:, 1], label="host mean")
    ok = ~np.isnan(yb[:, 0])
    axes[1].plot(yb[ok, 0], yb[ok, 1], "--", label="pathogen mean")
    axes[1].set_aspect("equal", adjustable="datalim")
else:
    axes[1].plot(t, [float(r["xbar1"]) for r in rows], label="host mean")
    axes[1].plot(t, [float(r["ybar1"]) for r in rows], "--", label="pathogen mean")
    axes[1].set_xlabel("t")
axes[1].legend()
axes[1].set_title("mean traits")

# Panel 3: final snapshot of the host density (pathogen as contours).
snaps = manifest["files"]["snapshots"]
if snaps:
    last = snaps[-1]
    data = np.genfromtxt(os.path.join(run, last["file"]), delimiter=",", names=True)
    m = grid["m"]
    z = np.linspace(grid["lo"], grid["hi"], m)
    if n == 2:
        h = data["h"].reshape(m, m)
        p = data["p"].reshape(m, m)
        # axes follow the data layout: first index slow, second fast
        axes[2].pcolormesh(z, z, h, shading="auto")
        if np.max(p) > 0:
            axes[2].contour(z, z, p, colors="w", linewidths=0.7)
        axes[2].set_title("t = %g (window at %s)" % (last["t"], last["offset"]))
    else:
        axes[2].plot(z, data["h"], label="h")
        axes[2].plot(z, data["p"], "--", label="p")
        axes[2].legend()
        axes[2].set_title("t = %g" % last["t"])

fig.tight_layout()
out = os.path.join(run, "plots.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)PY";

const char* const kPlotSweepScript = R"PY(#!/usr/bin/env python3
"""Plot a sweep summary: the regime map over the first two swept
parameters (or fitted speed against a single swept parameter).

Usage: python3 plot_sweep.py [sweep_dir]   (default: the script's directory)
Reads manifest.json and sweep_summary.csv; writes sweep.png.
Needs matplotlib.
"""
import csv
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

run = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(run, "manifest.json")) as f:
    manifest = json.load(f)
axes_spec = manifest["axes"]
rows = list(csv.DictReader(open(os.path.join(run, "sweep_summary.csv"))))

# Recover the per-cell override values from the cell key "a=x_b=y".
def overrides(key):
    out = {}
    for part in key.split("_"):
        name, _, value = part.partition("=")
        if value:
            out[name] = float(value)
    return out

fig, ax = plt.subplots(figsize=(6, 5))
if len(axes_spec) >= 2:
    # Phase diagram: one marker per cell, colored by classified regime.
    kx, ky = axes_spec[0]["key"], axes_spec[1]["key"]
    regimes = sorted({r["regime"] for r in rows if r["regime"]})
    colors = plt.cm.tab10.colors
    for i, regime in enumerate(regimes):
        xs = [overrides(r["cell"])[kx] for r in rows if r["regime"] == regime]
        ys = [overrides(r["cell"])[ky] for r in rows if r["regime"] == regime]
        ax.scatter(xs, ys, s=160, color=colors[i % 10], label=regime)
    ax.set_xlabel(kx)
    ax.set_ylabel(ky)
    ax.legend()
    ax.set_title("regime map")
elif len(axes_spec) == 1:
    # Response curve: fitted pulse speed against the swept parameter.
    kx = axes_spec[0]["key"]
    pts = [(overrides(r["cell"])[kx], float(r["c_fit"]))
           for r in rows if r["status"] == "ok" and r["c_fit"]]
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-")
    ax.set_xlabel(kx)
    ax.set_ylabel("fitted speed")
    ax.set_title("speed response")
else:
    ax.text(0.5, 0.5, "single cell; see cells/*/plot_run.py", ha="center")

fig.tight_layout()
out = os.path.join(run, "sweep.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)PY";

// ------------------------------------------------------------------------
// Run artifacts shared by simulate and sweep cells.

struct RunPaths {
    fs::path dir;
    std::vector<json> snapshot_entries;  ///< {file, t, offset} per snapshot
};

/// Writes trajectory.csv and the numbered snapshot CSVs.
RunPaths write_run_data(const fs::path& dir, const ModelParams& prm, const Trajectory& traj) {
    RunPaths paths;
    paths.dir = dir;
    write_trajectory_csv(dir / "trajectory.csv", prm.n, traj.samples);
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const Snapshot& s = traj.snapshots[i];
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
        write_snapshot_csv(dir / name, traj.grid, s.h, s.p);
        paths.snapshot_entries.push_back(json{
            {"file", name}, {"t", s.t}, {"offset", point_to_json(s.offset, prm.n)}});
    }
    return paths;
}

/// Manifest echoing the resolved configuration; on its own it is enough to
/// rerun and to reload every artifact in the directory.
json run_manifest(const char* command, const ModelParams& prm, const SimOptions& opt,
                  const Grid& grid, double dt, const Trajectory* traj,
                  const RunPaths& paths) {
    json files{{"config", "config.ini"},
               {"trajectory", "trajectory.csv"},
               {"plot", "plot_run.py"},
               {"snapshots", json(paths.snapshot_entries)}};
    json m{{"command", command},
           {"model", params_to_json(prm)},
           {"run", sim_options_to_json(opt, prm.n)},
           {"grid", grid_to_json(grid)},
           {"dt", dt},
           {"files", files}};
    if (traj && !traj->samples.empty()) {
        const TrajectorySample& last = traj->samples.back();
        m["summary"] = json{{"t_final", last.t},
                            {"H_final", last.H},
                            {"P_final", last.P},
                            {"xbar_final", point_to_json(last.xbar, prm.n)}};
        if (!traj->snapshots.empty())
            m["frame_shift"] = point_to_json(traj->snapshots.back().offset, prm.n);
    }
    return m;
}

// ------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const std::string& out_flag) {
    const SimulationConfig cfg = parse_sim_config(config_path);
    const fs::path dir = resolve_out_dir(out_flag, cfg.out_dir);
    const ModelParams prm = cfg.params.validated();

    if (cfg.options.t_end == 0.0) {
        // Summary-only: resolve the discretization the run would use and
        // record it without integrating.
        Point offset{0.0, 0.0};
        if (cfg.options.comoving) offset = cfg.options.x0;
        const double hw = cfg.options.half_width > 0.0
                              ? cfg.options.half_width
                              : detail::auto_half_width(prm, cfg.options, offset);
        const Grid grid(prm.n, -hw, hw, cfg.options.m);
        RunPaths paths;
        paths.dir = dir;
        write_trajectory_csv(dir / "trajectory.csv", prm.n, {});
        json manifest = run_manifest("simulate", prm, cfg.options, grid,
                                     stable_dt(prm, grid), nullptr, paths);
        manifest["summary_only"] = true;
        write_json_file(dir / "manifest.json", manifest);
        write_text_file(dir / "config.ini", read_text_file(config_path));
        write_text_file(dir / "plot_run.py", kPlotRunScript);
        std::printf("summary-only: grid m=%d on [%.6g, %.6g], stable dt %.6g\n",
                    grid.m, grid.lo, grid.hi, stable_dt(prm, grid));
        std::printf("wrote %s\n", dir.string().c_str());
        return 0;
    }

    const Trajectory traj = simulate(prm, cfg.options);
    const RunPaths paths = write_run_data(dir, prm, traj);
    write_json_file(dir / "manifest.json",
                    run_manifest("simulate", prm, cfg.options, traj.grid, traj.dt, &traj,
                                 paths));
    write_text_file(dir / "config.ini", read_text_file(config_path));
    write_text_file(dir / "plot_run.py", kPlotRunScript);

    const TrajectorySample& last = traj.samples.back();
    std::printf("t = %.6g: H = %.6g, P = %.6g, %zu samples, %zu snapshots\n", last.t,
                last.H, last.P, traj.samples.size(), traj.snapshots.size());
    std::printf("wrote %s\n", dir.string().c_str());
    return 0;
}

// ------------------------------------------------------------------------
// analyze

/// Rebuilds the trajectory recorded in a run directory from its manifest.
Trajectory load_run(const fs::path& dir, ModelParams& prm) {
    const json manifest = read_json_file(dir / "manifest.json");
    prm = params_from_json(manifest.at("model"));
    Trajectory traj{grid_from_json(manifest.at("grid")), manifest.at("dt").get<double>(), {}, {}};
    traj.samples = read_trajectory_csv(dir / "trajectory.csv", prm.n);
    for (const json& entry : manifest.at("files").at("snapshots")) {
        Snapshot s;
        s.t = entry.at("t").get<double>();
        s.offset = point_from_json(entry.at("offset"));
        auto [h, p] = read_snapshot_csv(dir / entry.at("file").get<std::string>(), traj.grid);
        s.h = std::move(h);
        s.p = std::move(p);
        traj.snapshots.push_back(std::move(s));
    }
    return traj;
}

int cmd_analyze(const std::string& run_dir) {
    const fs::path dir(run_dir);
    ModelParams prm;
    const Trajectory traj = load_run(dir, prm);
    if (traj.samples.empty())
        throw config_error("analyze: " + run_dir +
                           " holds no trajectory samples (summary-only run)");

    const PulseReport rep = classify(prm, traj);
    write_json_file(dir / "report.json", pulse_report_to_json(rep, prm.n));

    std::printf("regime          %s\n", regime_name(rep.regime));
    std::printf("speed fit       %.6g (r2 %.6g)\n", rep.c_fit, rep.r2);
    std::printf("delay fit       %.6g\n", rep.delay_fit);
    std::printf("radius fit      %.6g\n", rep.radius_fit);
    std::printf("angular speed   %.6g\n", rep.omega_fit);
    std::printf("ring score      %.6g\n", rep.ring_score_last);
    std::printf("wrote %s\n", (dir / "report.json").string().c_str());
    return 0;
}

// ------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& suite, int kmax, double b,
               const std::string& config_path, const std::string& out_flag) {
    SeriesVerifyOptions sopt;
    sopt.b = b;
    sopt.k_max = kmax;
    if (!config_path.empty()) {
        // The scaled impact width the series experiments use is derived
        // from the model: theta_bar = mu_H theta / beta.
        const ModelParams prm = parse_config_file(config_path).base.params.validated();
        if (!(prm.beta > 0.0))
            throw config_error(
                "verify: deriving the scaled width needs a cohesion term (beta > 0)");
        sopt.theta_bar = prm.mu_H() * prm.theta / prm.beta;
    }
    sopt.out_dir = resolve_out_dir(out_flag, "verify").string();

    std::vector<std::pair<std::string, std::vector<CheckResult>>> suites;
    const bool all = suite == "all";
    if (all || suite == "hermite") suites.emplace_back("hermite", verify_hermite());
    if (all || suite == "stationary") suites.emplace_back("stationary", verify_stationary());
    if (all || suite == "pursuit") suites.emplace_back("pursuit", verify_pursuit());
    if (all || suite == "series") suites.emplace_back("series", verify_series(sopt));

    int failures = 0, total = 0, skipped = 0;
    for (const auto& [name, results] : suites) {
        std::printf("suite %s\n", name.c_str());
        for (const CheckResult& r : results) {
            const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
            std::printf("  [%s] %-55s %s\n", tag, r.name.c_str(), r.detail.c_str());
            ++total;
            if (r.skipped) ++skipped;
            if (!r.passed) ++failures;
        }
    }
    std::printf("%d checks: %d passed, %d failed, %d skipped\n", total,
                total - failures - skipped, failures, skipped);
    return failures == 0 ? 0 : 1;
}

// ------------------------------------------------------------------------
// sweep

struct SweepCell {
    std::string key;                                   ///< "alpha_H=0.2_beta=1"
    std::vector<std::pair<std::string, double>> sets;  ///< overrides, axis order
    std::string status = "ok";
    std::string note;
    PulseReport report;
    double t_final = 0.0, H_final = 0.0, P_final = 0.0;
};

std::string cell_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// One cell: apply the overrides, integrate, classify, write a run dir.
void run_cell(const SimulationConfig& base, const fs::path& cells_dir, SweepCell& cell) {
    try {
        ModelParams prm = base.params;
        for (const auto& [key, value] : cell.sets)
            apply_model_override(prm, key, value, "sweep cell " + cell.key);
        prm = prm.validated();

        const Trajectory traj = simulate(prm, base.options);
        const fs::path dir = cells_dir / cell.key;
        const RunPaths paths = write_run_data(dir, prm, traj);
        json manifest =
            run_manifest("sweep-cell", prm, base.options, traj.grid, traj.dt, &traj, paths);
        json overrides = json::object();
        for (const auto& [key, value] : cell.sets) overrides[key] = value;
        manifest["overrides"] = overrides;
        manifest["files"]["config"] = nullptr;  // resolved config lives in the manifest
        manifest["files"]["report"] = "report.json";
        write_json_file(dir / "manifest.json", manifest);
        write_text_file(dir / "plot_run.py", kPlotRunScript);

        cell.report = classify(prm, traj);
        write_json_file(dir / "report.json", pulse_report_to_json(cell.report, prm.n));
        const TrajectorySample& last = traj.samples.back();
        cell.t_final = last.t;
        cell.H_final = last.H;
        cell.P_final = last.P;
    } catch (const config_error& e) {
        cell.status = "config-error";
        cell.note = e.what();
    } catch (const infeasible_error& e) {
        cell.status = "infeasible";
        cell.note = e.what();
    } catch (const std::exception& e) {
        cell.status = "numeric-error";
        cell.note = e.what();
    }
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, int jobs) {
    const SweepConfig sc = parse_config_file(config_path);
    const fs::path dir = resolve_out_dir(out_flag, sc.base.out_dir);

    // Cartesian product of the axes, in declaration order.
    std::vector<SweepCell> cells(1);
    for (const SweepAxis& axis : sc.axes) {
        std::vector<SweepCell> next;
        for (const SweepCell& partial : cells)
            for (double v : axis.values) {
                SweepCell c = partial;
                c.sets.emplace_back(axis.key, v);
                c.key += (c.key.empty() ? "" : "_") + axis.key + "=" + cell_value(v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    if (cells.size() == 1 && cells[0].key.empty()) cells[0].key = "base";

    // Worker pool; each cell is deterministic and writes only its own dir.
    const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min(cells.size(), jobs > 0 ? static_cast<std::size_t>(jobs) : hardware);
    std::atomic<std::size_t> next_cell{0};
    auto worker = [&] {
        for (std::size_t i; (i = next_cell.fetch_add(1)) < cells.size();)
            run_cell(sc.base, dir / "cells", cells[i]);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    // Aggregate in key order so the artifacts do not depend on scheduling.
    std::sort(cells.begin(), cells.end(),
              [](const SweepCell& a, const SweepCell& b) { return a.key < b.key; });
    std::string csv =
        "cell,status,regime,c_fit,delay_fit,radius_fit,omega_fit,r2,t_final,H_final,P_final\n";
    int succeeded = 0;
    json cell_index = json::array();
    for (const SweepCell& c : cells) {
        csv += c.key + "," + c.status + ",";
        if (c.status == "ok") {
            ++succeeded;
            csv += std::string(regime_name(c.report.regime)) + "," +
                   format_g17(c.report.c_fit) + "," + format_g17(c.report.delay_fit) + "," +
                   format_g17(c.report.radius_fit) + "," + format_g17(c.report.omega_fit) +
                   "," + format_g17(c.report.r2) + "," + format_g17(c.t_final) + "," +
                   format_g17(c.H_final) + "," + format_g17(c.P_final);
        } else {
            csv += ",,,,,,,,";
        }
        csv += "\n";
        cell_index.push_back(json{{"key", c.key},
                                  {"dir", "cells/" + c.key},
                                  {"status", c.status},
                                  {"note", c.note}});
        std::printf("[%s] %s%s%s\n", c.status.c_str(), c.key.c_str(),
                    c.status == "ok" ? " -> " : "",
                    c.status == "ok" ? regime_name(c.report.regime) : "");
    }
    write_text_file(dir / "sweep_summary.csv", csv);

    json axes = json::array();
    for (const SweepAxis& axis : sc.axes)
        axes.push_back(json{{"key", axis.key}, {"values", axis.values}});
    write_json_file(dir / "manifest.json",
                    json{{"command", "sweep"},
                         {"model", params_to_json(sc.base.params)},
                         {"run", sim_options_to_json(sc.base.options, sc.base.params.n)},
                         {"axes", axes},
                         {"cells", cell_index},
                         {"files", json{{"config", "config.ini"},
                                        {"summary", "sweep_summary.csv"},
                                        {"plot", "plot_sweep.py"}}}});
    write_text_file(dir / "config.ini", read_text_file(config_path));
    write_text_file(dir / "plot_sweep.py", kPlotSweepScript);

    std::printf("%d/%zu cells succeeded; wrote %s\n", succeeded, cells.size(),
                dir.string().c_str());
    return succeeded > 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"redqueen: host-pathogen coevolution laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_flag, run_dir, suite = "all";
    int kmax = 400, jobs = 0;
    double b = 5.0;

    CLI::App* sim = app.add_subcommand("simulate", "integrate the model from a config file");
    sim->add_option("--config", config_path, "plain-text run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--out", out_flag, "output directory (overrides the config)");

    CLI::App* ana = app.add_subcommand("analyze", "classify the regime of a finished run");
    ana->add_option("run_dir", run_dir, "run directory holding manifest.json")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* ver = app.add_subcommand("verify", "run the closed-form verification suites");
    ver->add_option("--suite", suite, "hermite, stationary, pursuit, series, or all")
        ->check(CLI::IsMember({"hermite", "stationary", "pursuit", "series", "all"}));
    ver->add_option("--kmax", kmax, "series: how far the scaled sums sweep")
        ->check(CLI::Range(10, 1000000));
    ver->add_option("--b", b, "series: coefficient decay exponent")
        ->check(CLI::PositiveNumber);
    ver->add_option("--config", config_path,
                    "derive the series width from this model (mu_H theta / beta)")
        ->check(CLI::ExistingFile);
    ver->add_option("--out", out_flag, "directory for verification artifacts");

    CLI::App* swp = app.add_subcommand("sweep", "run a grid of parameter overrides");
    swp->add_option("--config", config_path, "configuration with a [sweep] section")
        ->required()
        ->check(CLI::ExistingFile);
    swp->add_option("--out", out_flag, "output directory (overrides the config)");
    swp->add_option("--jobs", jobs, "worker pool size (0 = hardware)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are exit 2, help is 0
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_flag);
        if (ana->parsed()) return cmd_analyze(run_dir);
        if (ver->parsed()) return cmd_verify(suite, kmax, b, config_path, out_flag);
        if (swp->parsed()) return cmd_sweep(config_path, out_flag, jobs);
    } catch (const config_error& e) {
        std::fprintf(stderr, "redqueen: %s\n", e.what());
        return 2;
    } catch (const infeasible_error& e) {
        std::fprintf(stderr, "redqueen: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "redqueen: %s\n", e.what());
        return 3;
    }
    return 2;  // unreachable: a subcommand is required
}
