#include "hyperbat/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "hyperbat/analytic.hpp"
#include "hyperbat/errors.hpp"
#include "hyperbat/fock.hpp"
#include "hyperbat/moments.hpp"

namespace hyperbat {

namespace {

const std::string kEnergyUnit = "omega_b sinh^2(Omega)";

double time_unit(const BatteryParams& p) { return p.gamma > 0.0 ? 1.0 / p.gamma : 1.0; }

GridSpec default_grid(Mode mode) {
    switch (mode) {
    case Mode::SweepTE:
    case Mode::SweepEmax:
    case Mode::Fig2b:
    case Mode::Fig2c: return {0.01, 100.0, 201, true};
    case Mode::Fig2a: return {0.0, 10.0, 401, false};
    default: return {0.0, 5.0, 201, false};
    }
}

// E_max / (omega_b sinh^2 Omega), defined through its Omega-independent limit.
double normalized_optimum(BatteryParams p) {
    p.omega_b = 1.0;
    const OptimalPoint opt = optimal_energy(p);
    const double C = enhancement_factor(p);
    if (C > 0.0) return opt.E_max / C;
    return std::exp(-0.5 * p.gamma * opt.t_E);
}

double normalized_ergotropy(const BatteryParams& p, double t) {
    const double scale = p.omega_b * enhancement_factor(p);
    return scale > 0.0 ? ergotropy(p, t).ergotropy / scale : 0.0;
}

BatteryParams with_ratio(BatteryParams p, double g_over_gamma) {
    if (!(p.gamma > 0.0)) throw Error(ErrorKind::ConfigInvalid, "coupling sweeps need gamma > 0");
    p.g = g_over_gamma * p.gamma;
    return p;
}

std::string csv_name(const std::string& panel) { return panel + ".csv"; }

} // namespace

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidTime:
    case ErrorKind::ConfigInvalid:
    case ErrorKind::FileIo: return kExitUsage;
    default: return kExitNumerical;
    }
}

Table trace_table(const RunConfig& config) {
    validate(config);
    const BatteryParams& p = config.params;
    const std::vector<double> xs = config.grid.value_or(default_grid(Mode::Trace)).points();
    const double unit = time_unit(p);
    const double scale = p.omega_b * enhancement_factor(p);

    Table t;
    t.columns = {"t_gamma", "E_norm", "ergotropy_norm", "D", "P"};
    t.units = {p.gamma > 0.0 ? "1/gamma" : "time", kEnergyUnit, kEnergyUnit, "1", "1"};
    for (double x : xs) {
        const EnergyRecord r = ergotropy(p, x * unit);
        const double e = scale > 0.0 ? r.E / scale : 0.0;
        const double w = scale > 0.0 ? r.ergotropy / scale : 0.0;
        t.rows.push_back({x, e, w, r.D, r.P});
    }
    if (!config.oracle) return t;

    fock::OracleOptions opts;
    opts.rtol = config.tol;
    opts.n_max = config.n_max;
    std::vector<fock::OracleReport> reports;
    if (config.pulse.kind == PulseKind::Delta) {
        std::vector<double> times;
        for (double x : xs) times.push_back(x * unit);
        reports = fock::run_oracle(p, times, opts);
    } else {
        // oracle times are measured from the end of the finite pulse
        std::vector<double> times;
        for (double x : xs) times.push_back(config.pulse.end_time() + x * unit);
        reports = fock::finite_width_pulse_run(p, config.pulse, times, opts).reports;
    }
    for (const auto& c : {"oracle_E_norm", "oracle_ergotropy_norm", "oracle_D", "oracle_truncation_weight"})
        t.columns.emplace_back(c);
    for (const auto& u : {kEnergyUnit, kEnergyUnit, std::string("1"), std::string("1")}) t.units.push_back(u);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        auto& row = t.rows[i];
        row.push_back(scale > 0.0 ? r.energy.E / scale : 0.0);
        row.push_back(scale > 0.0 ? r.energy.ergotropy / scale : 0.0);
        row.push_back(r.energy.D);
        row.push_back(r.truncation_weight);
    }
    return t;
}

Table sweep_table(const RunConfig& config) {
    validate(config);
    const bool times = config.mode == Mode::SweepTE || config.mode == Mode::Fig2b;
    if (!times && config.mode != Mode::SweepEmax && config.mode != Mode::Fig2c)
        throw Error(ErrorKind::ConfigInvalid, "sweep needs mode sweep_tE or sweep_Emax");
    const std::vector<double> ratios = config.grid.value_or(default_grid(config.mode)).points();
    Table t;
    if (times) {
        t.columns = {"g_over_gamma", "tE_gamma", "tE_weak", "tE_strong"};
        t.units = {"1", "1/gamma", "1/gamma", "1/gamma"};
    } else {
        t.columns = {"g_over_gamma", "Emax_norm", "Emax_weak", "Emax_strong"};
        t.units = {"1", kEnergyUnit, kEnergyUnit, kEnergyUnit};
    }
    t.rows.resize(ratios.size());
    parallel_for(ratios.size(), config.jobs, [&](std::size_t i) {
        const double x = ratios[i];
        BatteryParams p = with_ratio(config.params, x);
        if (times) {
            t.rows[i] = {x, optimal_time(p) * p.gamma, asymptotic_optimal_time(p, CouplingLimit::WeakCoupling) * p.gamma,
                         asymptotic_optimal_time(p, CouplingLimit::StrongCoupling) * p.gamma};
        } else {
            // asymptotes in the same normalisation: (2g/gamma)^2 and 1 - pi gamma / 4g
            t.rows[i] = {x, normalized_optimum(p), 4.0 * x * x, 1.0 - std::numbers::pi / (4.0 * x)};
        }
    });
    return t;
}

bool VerificationReport::pass() const {
    return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.pass; });
}

double VerificationReport::max_rel_err() const {
    double m = 0.0;
    for (const auto& c : cases) m = std::max(m, c.rel_err_oracle);
    return m;
}

VerifyCase verify_case(const BatteryParams& p, const VerifyGrid& grid, const RunConfig& config) {
    VerifyCase vc;
    vc.g = p.g;
    vc.gamma = p.gamma;
    vc.Omega = p.Omega;
    const double t_stop = p.gamma > 0.0 ? grid.t_stop_gamma / p.gamma : grid.t_stop_gamma / std::max(p.g, 1e-300);
    std::vector<double> times(static_cast<std::size_t>(grid.t_count));
    for (int k = 0; k < grid.t_count; ++k) times[static_cast<std::size_t>(k)] = t_stop * k / (grid.t_count - 1);

    const double C = enhancement_factor(p);
    const double sc = std::sinh(p.Omega) * std::cosh(p.Omega);
    const auto moments = propagate_moments(post_pulse_moments(p.Omega), p, times);

    fock::OracleOptions opts;
    opts.rtol = config.tol;
    opts.n_max = config.n_max;
    opts.certify = false;
    std::vector<fock::OracleReport> oracle;
    try {
        oracle = fock::run_oracle(p, times, opts);
    } catch (const Error& e) {
        vc.note = e.what();
        vc.pass = false;
        return vc;
    }
    vc.n_max = oracle.front().n_max;
    vc.truncation_weight = 0.0;
    // relative error is pointwise; the floor only matters where the exact value vanishes (t = 0)
    std::vector<double> exact_nb(times.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        exact_nb[i] = population_holder(p, times[i]);
        peak = std::max(peak, std::abs(exact_nb[i]));
    }
    const double floor = std::max(1e-9 * peak, 1e-300);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double exact = exact_nb[i];
        const double denom = std::max(std::abs(exact), floor);
        vc.rel_err_oracle = std::max(vc.rel_err_oracle, std::abs(oracle[i].moments.n_b - exact) / denom);
        vc.rel_err_moments = std::max(vc.rel_err_moments, std::abs(moments[i].n_b - exact) / denom);
        if (sc > 0.0) vc.sq_bb_diff = std::max(vc.sq_bb_diff, std::abs(oracle[i].moments.sq_bb - moments[i].sq_bb) / sc);
        vc.first_moments = std::max(vc.first_moments, std::abs(oracle[i].mean_a) + std::abs(oracle[i].mean_b));
        vc.truncation_weight = std::max(vc.truncation_weight, oracle[i].truncation_weight);
        if (p.gamma == 0.0) {
            const double initial_oracle = oracle.front().moments.n_a + oracle.front().moments.n_b;
            vc.conservation = std::max({vc.conservation,
                                        std::abs(oracle[i].moments.n_a + oracle[i].moments.n_b - initial_oracle),
                                        std::abs(moments[i].n_a + moments[i].n_b - C)});
        }
    }
    vc.certified = vc.truncation_weight < fock::kTruncationLimit;
    std::vector<std::string> why;
    if (!vc.certified) why.push_back("truncation certificate violated");
    if (!(vc.rel_err_oracle < kVerifyTolerance)) why.push_back("oracle/analytic mismatch");
    if (!(vc.rel_err_moments < kVerifyTolerance)) why.push_back("moments/analytic mismatch");
    if (!(vc.sq_bb_diff < kVerifyTolerance)) why.push_back("<bb> oracle/moments mismatch");
    if (!(vc.first_moments < kFirstMomentTolerance)) why.push_back("nonzero first moments");
    if (p.gamma == 0.0 && !(vc.conservation < kConservationTolerance)) why.push_back("excitation number not conserved");
    vc.pass = why.empty();
    for (std::size_t i = 0; i < why.size(); ++i) vc.note += (i ? "; " : "") + why[i];
    return vc;
}

VerificationReport run_verification(const RunConfig& config, const VerifyGrid& grid) {
    validate(config);
    std::vector<BatteryParams> cases;
    for (double om : grid.Omega) {
        for (double x : grid.g_over_gamma) {
            BatteryParams p = config.params;
            p.Omega = om;
            cases.push_back(with_ratio(p, x));
        }
        if (grid.lossless_rows) {
            BatteryParams p = config.params;
            p.Omega = om;
            p.gamma = 0.0;
            p.g = 1.0;
            cases.push_back(p);
        }
    }
    VerificationReport report;
    report.cases.resize(cases.size());
    parallel_for(cases.size(), config.jobs,
                 [&](std::size_t i) { report.cases[i] = verify_case(cases[i], grid, config); });
    return report;
}

Table to_table(const VerificationReport& report) {
    Table t;
    t.columns = {"g",          "gamma",          "Omega",           "n_max",         "truncation_weight",
                 "rel_err_oracle", "rel_err_moments", "sq_bb_diff", "first_moments", "conservation",
                 "pass"};
    t.units = {"rad/time", "1/time", "1", "1", "1", "1", "1", "1", "1", "1", "bool"};
    for (const auto& c : report.cases)
        t.rows.push_back({c.g, c.gamma, c.Omega, double(c.n_max), c.truncation_weight, c.rel_err_oracle,
                          c.rel_err_moments, c.sq_bb_diff, c.first_moments, c.conservation, c.pass ? 1.0 : 0.0});
    return t;
}

std::vector<double> fig2a_omegas() { return {0.1, 0.5, 1.0, 2.0, 5.0}; }

FigurePanel figure_panel(Mode panel, const RunConfig& config) {
    FigurePanel out;
    out.name = to_string(panel);
    std::ostringstream gp;
    gp << "# gnuplot script; data in " << csv_name(out.name) << "\n"
       << "set datafile separator ','\nset key autotitle columnhead\n";
    if (panel == Mode::Fig2a) {
        BatteryParams p = with_ratio(config.params, 2.0);
        const std::vector<double> xs = config.grid.value_or(default_grid(Mode::Fig2a)).points();
        const std::vector<double> omegas = fig2a_omegas();
        Table& t = out.table;
        t.columns = {"t_gamma", "E_norm"};
        for (double om : omegas) t.columns.push_back("ergotropy_norm_Omega_" + format_number(om));
        t.columns.insert(t.columns.end(), {"weak_drive_P2", "strong_drive_P"});
        t.units.assign(t.columns.size(), kEnergyUnit);
        t.units[0] = "1/gamma";
        for (double x : xs) {
            const double time = x / p.gamma;
            const double P = excitation_fraction(p, time);
            std::vector<double> row{x, P};
            for (double om : omegas) {
                BatteryParams q = p;
                q.Omega = om;
                row.push_back(normalized_ergotropy(q, time));
            }
            row.push_back(P * P);
            row.push_back(P);
            t.rows.push_back(std::move(row));
        }
        gp << "set xlabel 'gamma t'\nset ylabel 'energy / (omega_b sinh^2 Omega)'\n"
           << "plot for [c=2:" << t.columns.size() << "] '" << csv_name(out.name) << "' using 1:c with lines\n";
    } else if (panel == Mode::Fig2b || panel == Mode::Fig2c) {
        RunConfig c = config;
        c.mode = panel;
        out.table = sweep_table(c);
        gp << "set logscale xy\nset xlabel 'g / gamma'\n"
           << (panel == Mode::Fig2b ? "set ylabel 'gamma t_E'\n" : "set ylabel 'E(t_E) / (omega_b sinh^2 Omega)'\n")
           << "plot '" << csv_name(out.name) << "' using 1:2 with lines, '' using 1:3 with lines dt 2, "
           << "'' using 1:4 with lines dt 2\n";
    } else {
        throw Error(ErrorKind::ConfigInvalid, "figure panel must be fig2a, fig2b or fig2c");
    }
    out.script = gp.str();
    return out;
}

int cmd_trace(const RunConfig& config) {
    write_table(trace_table(config), config);
    return kExitOk;
}

int cmd_sweep(const RunConfig& config) {
    write_table(sweep_table(config), config);
    return kExitOk;
}

int cmd_verify(const RunConfig& config, const VerifyGrid& grid) {
    const VerificationReport report = run_verification(config, grid);
    write_table(to_table(report), config);
    for (const auto& c : report.cases)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << "g=" << format_number(c.g) << " gamma=" << format_number(c.gamma)
                  << " Omega=" << format_number(c.Omega) << " n_max=" << c.n_max
                  << " rel_err=" << format_number(c.rel_err_oracle) << (c.note.empty() ? "" : "  [" + c.note + "]")
                  << "\n";
    std::cerr << (report.pass() ? "PASS" : "FAIL") << ": " << report.cases.size()
              << " cases, max relative error " << format_number(report.max_rel_err()) << "\n";
    return report.pass() ? kExitOk : kExitVerifyFail;
}

int cmd_figure(const RunConfig& config) {
    const FigurePanel panel = figure_panel(config.mode, config);
    const std::filesystem::path dir = config.out.empty() ? std::filesystem::path("figures") : std::filesystem::path(config.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::FileIo, "cannot create '" + dir.string() + "'");
    {
        std::ofstream os(dir / csv_name(panel.name));
        if (!os) throw Error(ErrorKind::FileIo, "cannot write figure data");
        write_csv(os, panel.table, config);
    }
    std::ofstream gp(dir / (panel.name + ".gp"));
    if (!gp) throw Error(ErrorKind::FileIo, "cannot write plot script");
    gp << panel.script;
    return kExitOk;
}

} // namespace hyperbat
