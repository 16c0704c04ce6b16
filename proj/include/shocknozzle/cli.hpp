#pragma once

// Operational surface: the CLI subcommands (background, window, coeffs,
// perturb, sweep, verify), result-bundle writers, and re-verification of
// stored results. Exit codes are a stable contract: 0 success, 2 validation
// error, 3 solver divergence/internal failure, 4 I/O error.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shocknozzle/background.hpp"
#include "shocknozzle/coefficients.hpp"
#include "shocknozzle/config.hpp"
#include "shocknozzle/errors.hpp"
#include "shocknozzle/io.hpp"
#include "shocknozzle/iteration.hpp"
#include "shocknozzle/physical.hpp"
#include "shocknozzle/residual.hpp"

namespace shocknozzle {

namespace fs = std::filesystem;

enum ExitCode : int {
    ExitOk = 0,
    ExitFailure = 1,
    ExitValidation = 2,
    ExitDivergence = 3,
    ExitIo = 4,
};

// ---- bundle writers ---------------------------------------------------------

inline json grid_meta(const GridQ& g) {
    return json{{"n1", g.n1}, {"n2", g.n2},       {"y1_min", g.y1_min},
                {"y1_max", g.y1_max}, {"h1", g.h1}, {"h2", g.h2}};
}

inline void write_sidecar(const fs::path& csv_path, json meta) {
    meta["file"] = csv_path.filename().string();
    meta["format"] = "csv";
    write_json(csv_path.string() + ".meta.json", meta);
}

inline void write_background_bundle(const fs::path& dir, const BackgroundSolution& bg,
                                    const PressureWindow& window) {
    fs::create_directories(dir);
    const GasModel& gas = bg.setup.gas;
    CsvTable t;
    t.comments = {"1D transonic shock background",
                  "branch: 0 = supersonic [L0,Ls], 1 = subsonic [Ls,L1], "
                  "2 = subsonic extension [Ls-delta0,L1]",
                  "columns: branch, x1, u (axial velocity), rho (density), P (pressure), "
                  "M2 (squared Mach number), B (Bernoulli)"};
    t.columns = {"branch", "x1", "u", "rho", "P", "M2", "B"};
    t.data.assign(7, {});
    auto emit = [&](const SolutionBranch& br, double id) {
        for (std::size_t k = 0; k < br.x.size(); ++k) {
            const double rho = br.rho[k], u = br.u[k];
            t.data[0].push_back(id);
            t.data[1].push_back(br.x[k]);
            t.data[2].push_back(u);
            t.data[3].push_back(rho);
            t.data[4].push_back(gas.pressure(rho));
            t.data[5].push_back(u * u / gas.sound_speed_sq(rho));
            t.data[6].push_back(bernoulli(gas, {rho, u, 0.0},
                                          bg.setup.force.potential(br.x[k])));
        }
    };
    emit(bg.supersonic, 0);
    emit(bg.subsonic, 1);
    emit(bg.extension, 2);
    write_csv(dir / "background_branches.csv", t);
    write_sidecar(dir / "background_branches.csv",
                  json{{"kind", "background_branches"},
                       {"units", "nondimensional"},
                       {"L0", bg.setup.L0},
                       {"L1", bg.setup.L1},
                       {"Ls", bg.Ls}});

    const double dexit_density = monotonicity_derivative(bg.Ls, bg.setup);
    const double rho_exit = bg.subsonic.rho.back();
    json summary{
        {"gamma", gas.gamma},
        {"entropy_const", gas.entropy_const},
        {"L0", bg.setup.L0},
        {"L1", bg.setup.L1},
        {"rho0", bg.setup.rho0},
        {"u0", bg.setup.u0},
        {"J", bg.J},
        {"Ls", bg.Ls},
        {"delta0", bg.delta0},
        {"exit_pressure", bg.exit_pressure},
        {"pressure_window", {{"P0", window.P0}, {"P1", window.P1}, {"degenerate", window.degenerate}}},
        {"pre_shock", {{"rho", bg.pre_shock.rho}, {"u", bg.pre_shock.u1}}},
        {"post_shock", {{"rho", bg.post_shock.rho}, {"u", bg.post_shock.u1}}},
        {"rh_residuals",
         {{"mass", bg.rh_mass_residual()}, {"momentum", bg.rh_momentum_residual()}}},
        {"entropy_ok", bg.entropy_ok()},
        {"bernoulli", {{"supersonic", bg.bernoulli_minus}, {"subsonic", bg.bernoulli_plus}}},
        {"d_exit_density_d_Ls", dexit_density},
        {"d_exit_pressure_d_Ls",
         gas.gamma * gas.entropy_const * std::pow(rho_exit, gas.gamma - 1.0) * dexit_density},
    };
    write_json(dir / "background_summary.json", summary);
}

inline void write_coefficients_bundle(const fs::path& dir, const LinearCoefficients& co) {
    fs::create_directories(dir);
    CsvTable t;
    t.comments = {"linearized-problem coefficient profiles on the y1 grid",
                  "u, rho, c2: subsonic background; du, ddu: analytic branch derivatives"};
    t.columns = {"y1", "u", "rho", "c2", "du", "ddu", "f", "B1", "B3", "B4",
                 "lambda", "lambda0", "lambda1", "lambda2", "a0", "a1", "a2"};
    t.data = {co.y1, co.u, co.rho, co.c2, co.du, co.ddu, co.f, co.B1, co.B3, co.B4,
              co.lambda, co.lambda0, co.lambda1, co.lambda2, co.a0, co.a1, co.a2};
    write_csv(dir / "coefficients.csv", t);
    write_sidecar(dir / "coefficients.csv", json{{"kind", "coefficients"}});
    const JumpPartials& p = co.jump_partials;
    write_json(dir / "coefficients_summary.json",
               json{{"b0", co.b0},
                    {"b2", co.b2},
                    {"b3", co.b3},
                    {"a3", co.a3},
                    {"jump_partials",
                     {{"dh1_drho", p.dh1_drho},
                      {"dh1_du", p.dh1_du},
                      {"dh1_dw", p.dh1_dw},
                      {"dh2_drho", p.dh2_drho},
                      {"dh2_du", p.dh2_du},
                      {"dh2_dw", p.dh2_dw}}}});
}

inline json report_to_json(const IterationReport& rep) {
    return json{{"converged", rep.converged},
                {"iterations", rep.iterations},
                {"epsilon", rep.epsilon},
                {"step_norms", rep.step_norms},
                {"state_norms", rep.state_norms},
                {"contraction_ratios", rep.contraction_ratios},
                {"kappa_history", rep.kappa_history},
                {"v4_minus1_history", rep.v4_minus1_history},
                {"compat_history", rep.compat_history},
                {"warnings", rep.warnings},
                {"final_step_norm", rep.final_step_norm}};
}

inline json residual_to_json(const ResidualReport& r) {
    return json{{"eq_density", r.eq_density},
                {"eq_curl", r.eq_curl},
                {"eq_bernoulli", r.eq_bernoulli},
                {"rh_mass", r.rh_mass},
                {"rh_momentum", r.rh_momentum},
                {"shock_slope", r.shock_slope},
                {"entropy_ok", r.entropy_ok},
                {"min_pressure_jump", r.min_pressure_jump},
                {"exit_pressure", r.exit_pressure},
                {"wall_normal_velocity", r.wall_normal_velocity}};
}

inline void write_perturb_bundle(const fs::path& dir, const PerturbationState& V,
                                 const IterationReport& rep, const ResidualReport& res,
                                 const PhysicalFields& phys, const BackgroundSolution& bg,
                                 const GridQ& grid) {
    fs::create_directories(dir);
    {
        CsvTable t;
        t.comments = {"perturbation fields on the computational rectangle Q",
                      "v1, v2: velocity perturbations; v3: Bernoulli perturbation"};
        t.columns = {"y1", "y2", "v1", "v2", "v3"};
        t.data.assign(5, {});
        for (int i = 0; i < grid.n1; ++i)
            for (int j = 0; j < grid.n2; ++j) {
                t.data[0].push_back(grid.y1(i));
                t.data[1].push_back(grid.y2(j));
                t.data[2].push_back(V.v1(i, j));
                t.data[3].push_back(V.v2(i, j));
                t.data[4].push_back(V.v3(i, j));
            }
        write_csv(dir / "fields_computational.csv", t);
        write_sidecar(dir / "fields_computational.csv",
                      json{{"kind", "fields_computational"}, {"grid", grid_meta(grid)}});
    }
    {
        CsvTable t;
        t.comments = {"flow fields on the mapped physical grid of the subsonic region"};
        t.columns = {"x1", "x2", "u1", "u2", "rho", "P", "B"};
        t.data.assign(7, {});
        for (int i = 0; i < grid.n1; ++i)
            for (int j = 0; j < grid.n2; ++j) {
                t.data[0].push_back(phys.x1(i, j));
                t.data[1].push_back(grid.y2(j));
                t.data[2].push_back(phys.u1(i, j));
                t.data[3].push_back(phys.u2(i, j));
                t.data[4].push_back(phys.rho(i, j));
                t.data[5].push_back(phys.P(i, j));
                t.data[6].push_back(phys.B(i, j));
            }
        write_csv(dir / "fields_physical.csv", t);
        write_sidecar(dir / "fields_physical.csv",
                      json{{"kind", "fields_physical"}, {"grid", grid_meta(grid)}});
    }
    {
        CsvTable t;
        t.comments = {"shock curve xi(y2) = Ls + v4(y2)"};
        t.columns = {"y2", "v4", "xi"};
        t.data.assign(3, {});
        for (int j = 0; j < grid.n2; ++j) {
            t.data[0].push_back(grid.y2(j));
            t.data[1].push_back(V.v4[j]);
            t.data[2].push_back(bg.Ls + V.v4[j]);
        }
        write_csv(dir / "shock_curve.csv", t);
        write_sidecar(dir / "shock_curve.csv", json{{"kind", "shock_curve"}, {"Ls", bg.Ls}});
    }
    write_json(dir / "iteration_report.json", report_to_json(rep));
    write_json(dir / "residual_summary.json", residual_to_json(res));
}

// ---- command implementations --------------------------------------------------

struct CliContext {
    SolverConfig cfg;
    bool quiet = false;

    void say(const std::string& msg) const {
        if (!quiet) std::cout << msg << "\n";
    }
};

inline BackgroundSolution compute_background(const SolverConfig& cfg) {
    cfg.validate_background_selector();
    const NozzleSetup setup = cfg.make_setup();
    if (cfg.shock_position) return background_for_shock_position(*cfg.shock_position, setup);
    return solve_shock_position(*cfg.exit_pressure, setup);
}

inline int cmd_window(const CliContext& ctx) {
    const NozzleSetup setup = ctx.cfg.make_setup();
    const PressureWindow w = pressure_window(setup);
    const fs::path dir = ctx.cfg.output_dir;
    fs::create_directories(dir);
    write_json(dir / "window.json",
               json{{"P0", w.P0}, {"P1", w.P1}, {"degenerate", w.degenerate}});
    ctx.say("admissible exit-pressure window: (P1, P0) = (" + format_double(w.P1) + ", " +
            format_double(w.P0) + ")");
    if (w.degenerate)
        ctx.say("degenerate window: exit pressure independent of shock position "
                "(zero force)");
    return ExitOk;
}

inline int cmd_background(const CliContext& ctx) {
    const NozzleSetup setup = ctx.cfg.make_setup();
    const PressureWindow w = pressure_window(setup);
    if (w.degenerate)
        ctx.say("degenerate window: exit pressure independent of shock position");
    const BackgroundSolution bg = compute_background(ctx.cfg);
    write_background_bundle(ctx.cfg.output_dir, bg, w);
    ctx.say("shock position Ls = " + format_double(bg.Ls));
    ctx.say("exit pressure Pe = " + format_double(bg.exit_pressure));
    ctx.say("jump residuals: mass " + format_double(bg.rh_mass_residual()) + ", momentum " +
            format_double(bg.rh_momentum_residual()));
    return ExitOk;
}

inline int cmd_coeffs(const CliContext& ctx) {
    const BackgroundSolution bg = compute_background(ctx.cfg);
    const GridQ grid = ctx.cfg.make_grid(bg.Ls);
    const LinearCoefficients co = compute_linear_coefficients(bg, grid);
    const NozzleSetup setup = ctx.cfg.make_setup();
    write_background_bundle(ctx.cfg.output_dir, bg, pressure_window(setup));
    write_coefficients_bundle(ctx.cfg.output_dir, co);
    ctx.say("coefficient profiles written (b0 = " + format_double(co.b0) + ", b2 = " +
            format_double(co.b2) + ", b3 = " + format_double(co.b3) + ", a3 = " +
            format_double(co.a3) + ")");
    return ExitOk;
}

inline int cmd_perturb(const CliContext& ctx) {
    const SolverConfig& cfg = ctx.cfg;
    const NozzleSetup setup = cfg.make_setup();
    setup.force.require_positive(setup.L0, setup.L1);
    const BackgroundSolution bg = compute_background(cfg);
    const GridQ grid = cfg.make_grid(bg.Ls);
    const LinearCoefficients co = compute_linear_coefficients(bg, grid);
    const ExitPerturbation exit = cfg.make_exit(grid);

    IterateOptions opts;
    opts.tol_fp = cfg.tol_fp;
    opts.max_iter = cfg.max_iter;
    opts.eps_max = cfg.eps_max;
    opts.trace.interp = cfg.char_interp_kind();

    auto [V, rep] = iterate(bg, co, exit, grid, opts);
    const ResidualReport res = nonlinear_residual(V, bg, co, exit, grid);
    const PhysicalFields phys = to_physical(V, bg, co, grid);
    write_background_bundle(cfg.output_dir, bg, pressure_window(setup));
    write_coefficients_bundle(cfg.output_dir, co);
    write_perturb_bundle(cfg.output_dir, V, rep, res, phys, bg, grid);
    write_text_file(fs::path(cfg.output_dir) / "config_used.ini", cfg.serialize());

    ctx.say("converged in " + std::to_string(rep.iterations) + " iterations; |V| = " +
            format_double(V.norm(grid.h2)) +
            (exit.epsilon > 0.0
                 ? ", |V|/epsilon = " + format_double(V.norm(grid.h2) / exit.epsilon)
                 : std::string()));
    for (const auto& wmsg : rep.warnings) ctx.say("warning: " + wmsg);
    ctx.say("interior residuals: density " + format_double(res.eq_density) + ", curl " +
            format_double(res.eq_curl) + ", transport " + format_double(res.eq_bernoulli));
    return ExitOk;
}

// ---- sweep ---------------------------------------------------------------------

struct SweepSpec {
    std::string parameter; // shock_position | epsilon
    std::vector<double> values;
};

inline int sweep_thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("SHOCKNOZZLE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && cap < static_cast<long>(n)) n = static_cast<unsigned>(cap);
    }
    return static_cast<int>(n);
}

inline int cmd_sweep(const CliContext& ctx, const SweepSpec& spec) {
    if (spec.parameter != "shock_position" && spec.parameter != "epsilon")
        throw ValidationError("sweep: unknown parameter '" + spec.parameter +
                              "' (expected shock_position or epsilon)");
    const fs::path dir = ctx.cfg.output_dir;
    fs::create_directories(dir);

    const std::size_t n = spec.values.size();
    std::vector<json> rows(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            const double v = spec.values[k];
            json row{{"value", v}, {"status", "ok"}};
            try {
                SolverConfig c = ctx.cfg;
                if (spec.parameter == "shock_position") {
                    c.exit_pressure.reset();
                    c.shock_position = v;
                    const BackgroundSolution bg = compute_background(c);
                    row["Ls"] = bg.Ls;
                    row["Pe"] = bg.exit_pressure;
                    row["rh_mass"] = bg.rh_mass_residual();
                    row["rh_momentum"] = bg.rh_momentum_residual();
                } else {
                    c.epsilon = v;
                    const BackgroundSolution bg = compute_background(c);
                    const GridQ grid = c.make_grid(bg.Ls);
                    const LinearCoefficients co = compute_linear_coefficients(bg, grid);
                    const ExitPerturbation exit = c.make_exit(grid);
                    IterateOptions opts;
                    opts.tol_fp = c.tol_fp;
                    opts.max_iter = c.max_iter;
                    opts.eps_max = c.eps_max;
                    opts.trace.interp = c.char_interp_kind();
                    auto [V, rep] = iterate(bg, co, exit, grid, opts);
                    const double norm = V.norm(grid.h2);
                    row["epsilon"] = v;
                    row["norm_V"] = norm;
                    row["norm_V_over_eps"] = v > 0.0 ? norm / v : 0.0;
                    row["xi_dev_over_eps"] = v > 0.0 ? V.max_shock_displacement() / v : 0.0;
                    row["iterations"] = rep.iterations;
                }
            } catch (const Error& e) {
                row["status"] = std::string("failed: ") + e.what();
            }
            rows[k] = std::move(row);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(sweep_thread_budget(), std::max<std::size_t>(n, 1));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    CsvTable summary;
    summary.comments = {"parameter sweep over " + spec.parameter,
                        "failed runs carry status 0 and are listed in sweep_failures.json"};
    json failures = json::array();
    if (spec.parameter == "shock_position") {
        summary.columns = {"Ls", "Pe", "rh_mass", "rh_momentum", "ok"};
        summary.data.assign(5, {});
        for (const auto& r : rows) {
            const bool ok = r["status"] == "ok";
            if (!ok) {
                failures.push_back(r);
                continue;
            }
            summary.data[0].push_back(r["Ls"].get<double>());
            summary.data[1].push_back(r["Pe"].get<double>());
            summary.data[2].push_back(r["rh_mass"].get<double>());
            summary.data[3].push_back(r["rh_momentum"].get<double>());
            summary.data[4].push_back(1.0);
        }
    } else {
        summary.columns = {"epsilon", "norm_V", "norm_V_over_eps", "xi_dev_over_eps",
                           "iterations"};
        summary.data.assign(5, {});
        for (const auto& r : rows) {
            const bool ok = r["status"] == "ok";
            if (!ok) {
                failures.push_back(r);
                continue;
            }
            summary.data[0].push_back(r["epsilon"].get<double>());
            summary.data[1].push_back(r["norm_V"].get<double>());
            summary.data[2].push_back(r["norm_V_over_eps"].get<double>());
            summary.data[3].push_back(r["xi_dev_over_eps"].get<double>());
            summary.data[4].push_back(r["iterations"].get<double>());
        }
    }
    write_csv(dir / "sweep_summary.csv", summary);
    if (!failures.empty()) write_json(dir / "sweep_failures.json", failures);
    ctx.say("sweep complete: " + std::to_string(n - failures.size()) + "/" + std::to_string(n) +
            " runs succeeded");
    return ExitOk;
}

// ---- verify ---------------------------------------------------------------------

struct VerifyCheck {
    std::string name;
    bool pass;
    double value;
    double tolerance;
    std::string detail;
};

inline int cmd_verify(const CliContext& ctx, const fs::path& result_dir) {
    std::vector<VerifyCheck> checks;
    auto add = [&](const std::string& name, bool pass, double value, double tol,
                   std::string detail = "") {
        checks.push_back({name, pass, value, tol, std::move(detail)});
    };

    const NozzleSetup setup = ctx.cfg.make_setup();
    const GasModel& gas = setup.gas;

    // --- background bundle
    const CsvTable br = read_csv(result_dir / "background_branches.csv");
    const json summary = read_json(result_dir / "background_summary.json");
    const auto& branch = br.column("branch");
    const auto& x1 = br.column("x1");
    const auto& u = br.column("u");
    const auto& rho = br.column("rho");
    const auto& P = br.column("P");
    const auto& M2 = br.column("M2");
    const auto& B = br.column("B");
    const double J = summary["J"].get<double>();

    bool dens_ok = true, flux_ok = true;
    std::string dens_where, flux_where;
    double flux_worst = 0.0, press_worst = 0.0, bern_worst = 0.0;
    for (std::size_t r = 0; r < br.rows(); ++r) {
        if (!(rho[r] > 0.0) && dens_ok) {
            dens_ok = false;
            dens_where = "branch " + std::to_string((int)branch[r]) + ", x1 = " +
                         format_double(x1[r]) + " (row " + std::to_string(r) + ")";
        }
        if (rho[r] > 0.0) {
            const double flux = std::abs(rho[r] * u[r] - J) / J;
            if (flux > flux_worst) {
                flux_worst = flux;
                flux_where = "x1 = " + format_double(x1[r]);
            }
            press_worst = std::max(press_worst,
                                   std::abs(P[r] - gas.pressure(rho[r])) /
                                       std::max(1.0, std::abs(P[r])));
        }
    }
    add("density_positive", dens_ok, dens_ok ? 1.0 : 0.0, 0.0, dens_where);
    add("mass_flux_constant", flux_ok && flux_worst <= 1e-10, flux_worst, 1e-10, flux_where);
    add("pressure_closure", press_worst <= 1e-13, press_worst, 1e-13);

    // Bernoulli constancy and Mach monotonicity per branch.
    bool mach_ok = true;
    for (int id = 0; id <= 2; ++id) {
        double bref = 0.0;
        bool first = true;
        double prevM2 = 0.0, prevx = 0.0;
        for (std::size_t r = 0; r < br.rows(); ++r) {
            if ((int)branch[r] != id || !(rho[r] > 0.0)) continue;
            if (first) {
                bref = B[r];
                prevM2 = M2[r];
                prevx = x1[r];
                first = false;
                continue;
            }
            bern_worst = std::max(bern_worst, std::abs(B[r] - bref) / std::max(1.0, std::abs(bref)));
            const bool force_active = setup.force(x1[r]) > 0.0;
            if (force_active && x1[r] > prevx) {
                if (id == 0 && !(M2[r] > prevM2)) mach_ok = false;   // supersonic: increasing
                if (id >= 1 && !(M2[r] < prevM2)) mach_ok = false;   // subsonic: decreasing
            }
            prevM2 = M2[r];
            prevx = x1[r];
        }
    }
    add("bernoulli_constant_per_branch", bern_worst <= 1e-10, bern_worst, 1e-10);
    add("mach_monotone", mach_ok, mach_ok ? 1.0 : 0.0, 0.0);

    const double rh_mass = summary["rh_residuals"]["mass"].get<double>();
    const double rh_mom = summary["rh_residuals"]["momentum"].get<double>();
    add("rh_mass", rh_mass <= 1e-10, rh_mass, 1e-10);
    add("rh_momentum", rh_mom <= 1e-10, rh_mom, 1e-10);
    add("entropy", summary["entropy_ok"].get<bool>(), 1.0, 0.0);

    // --- perturbation bundle, when present
    if (fs::exists(result_dir / "fields_computational.csv")) {
        const json meta = read_json(result_dir / "fields_computational.csv.meta.json");
        const int n1 = meta["grid"]["n1"].get<int>();
        const int n2 = meta["grid"]["n2"].get<int>();
        const CsvTable ft = read_csv(result_dir / "fields_computational.csv");
        const CsvTable st = read_csv(result_dir / "shock_curve.csv");
        if (static_cast<int>(ft.rows()) != n1 * n2)
            throw IoError("verify: field table size does not match its grid metadata");

        const BackgroundSolution bg = compute_background(ctx.cfg);
        const GridQ grid(n1, n2, bg.Ls, setup.L1);
        const LinearCoefficients co = compute_linear_coefficients(bg, grid);
        PerturbationState V = PerturbationState::zero(grid);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                const std::size_t r = static_cast<std::size_t>(i) * n2 + j;
                V.v1(i, j) = ft.column("v1")[r];
                V.v2(i, j) = ft.column("v2")[r];
                V.v3(i, j) = ft.column("v3")[r];
            }
        V.v4 = st.column("v4");
        V.v4_minus1 = V.v4.front();

        SolverConfig cfg_used = ctx.cfg;
        if (fs::exists(result_dir / "config_used.ini"))
            cfg_used = SolverConfig::parse(read_text_file(result_dir / "config_used.ini"));
        const ExitPerturbation exit = cfg_used.make_exit(grid);

        const double scale = std::max(V.norm(grid.h2), exit.epsilon);
        const double h2sq = grid.h2 * grid.h2;
        const CompatReport comp = check_state_compatibility(V, grid);
        add("state_wall_compatibility", comp.max() <= 100.0 * h2sq * scale + 1e-12, comp.max(),
            100.0 * h2sq * scale + 1e-12);

        const ResidualReport res = nonlinear_residual(V, bg, co, exit, grid);
        const double interior_tol = grid.h2 * grid.h2 + cfg_used.tol_fp;
        add("interior_residual", res.max_interior() <= interior_tol, res.max_interior(),
            interior_tol);
        add("exit_pressure_residual", res.exit_pressure <= interior_tol, res.exit_pressure,
            interior_tol);
        add("wall_normal_velocity", res.wall_normal_velocity <= 1e-12,
            res.wall_normal_velocity, 1e-12);
        add("foot_entropy", res.entropy_ok, res.entropy_ok ? 1.0 : 0.0, 0.0);
        add("foot_rh_mass", res.rh_mass <= interior_tol, res.rh_mass, interior_tol);
        add("foot_rh_momentum", res.rh_momentum <= interior_tol, res.rh_momentum, interior_tol);
    }

    bool all = true;
    json out = json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        out.push_back(json{{"name", c.name},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
        ctx.say(std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name + " (value " +
                format_double(c.value) + ", tolerance " + format_double(c.tolerance) + ")" +
                (c.detail.empty() ? "" : " at " + c.detail));
    }
    write_json(result_dir / "verify_report.json", json{{"all_pass", all}, {"checks", out}});
    return all ? ExitOk : ExitValidation;
}

// ---- entry point ------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"steady transonic shock solver for a forced flat nozzle"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override, grid_override;
    double epsilon_override = -1.0;
    bool quiet = false;
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--grid", grid_override, "grid override, e.g. 129x129");
    app.add_option("--epsilon", epsilon_override, "exit-perturbation amplitude override");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* c_background = app.add_subcommand("background", "compute the 1D background shock");
    auto* c_window = app.add_subcommand("window", "compute the admissible exit-pressure window");
    auto* c_coeffs = app.add_subcommand("coeffs", "dump linearized-problem coefficients");
    auto* c_perturb = app.add_subcommand("perturb", "solve the 2D perturbed shock problem");
    auto* c_sweep = app.add_subcommand("sweep", "parameter sweep with a summary table");
    auto* c_verify = app.add_subcommand("verify", "re-check invariants of stored results");

    std::string sweep_param = "shock_position";
    std::string sweep_values;
    double sweep_from = 0.0, sweep_to = 0.0;
    int sweep_count = -1;
    c_sweep->add_option("--param", sweep_param, "shock_position | epsilon");
    c_sweep->add_option("--values", sweep_values, "comma-separated parameter values");
    c_sweep->add_option("--from", sweep_from, "range start");
    c_sweep->add_option("--to", sweep_to, "range end");
    c_sweep->add_option("--count", sweep_count, "range sample count");

    std::string verify_dir;
    c_verify->add_option("result", verify_dir, "result directory to verify")->required();

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ExitOk : ExitValidation;
    }

    try {
        CliContext ctx;
        ctx.cfg = SolverConfig::parse(read_text_file(config_path));
        ctx.quiet = quiet;
        if (!out_override.empty()) ctx.cfg.output_dir = out_override;
        if (epsilon_override >= 0.0) ctx.cfg.epsilon = epsilon_override;
        if (!grid_override.empty()) {
            const auto x = grid_override.find('x');
            if (x == std::string::npos)
                throw ValidationError("--grid: expected N1xN2, got '" + grid_override + "'");
            ctx.cfg.n1 = detail::parse_int(grid_override.substr(0, x), "--grid");
            ctx.cfg.n2 = detail::parse_int(grid_override.substr(x + 1), "--grid");
        }

        if (c_background->parsed()) return cmd_background(ctx);
        if (c_window->parsed()) return cmd_window(ctx);
        if (c_coeffs->parsed()) return cmd_coeffs(ctx);
        if (c_perturb->parsed()) return cmd_perturb(ctx);
        if (c_sweep->parsed()) {
            SweepSpec spec;
            spec.parameter = sweep_param;
            if (!sweep_values.empty()) {
                std::string item;
                std::istringstream is(sweep_values);
                while (std::getline(is, item, ','))
                    if (!detail::trim(item).empty())
                        spec.values.push_back(
                            detail::parse_double(detail::trim(item), "--values"));
            } else if (sweep_count > 0) {
                for (int k = 0; k < sweep_count; ++k)
                    spec.values.push_back(
                        sweep_count == 1
                            ? sweep_from
                            : sweep_from + (sweep_to - sweep_from) * k / (sweep_count - 1));
            }
            return cmd_sweep(ctx, spec);
        }
        if (c_verify->parsed()) return cmd_verify(ctx, verify_dir);
        throw ValidationError("no subcommand given");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitValidation;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitDivergence;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitIo;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ExitFailure;
    }
}

} // namespace shocknozzle
