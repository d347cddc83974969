// hyperbat - command-line front end: trace, sweep, verify, figure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperbat/commands.hpp"
#include "hyperbat/errors.hpp"
#include "hyperbat/harness.hpp"

using namespace hyperbat;

namespace {

struct Flags {
    std::optional<double> g, gamma, omega_b, omega_drive, tol, tau;
    std::optional<std::string> grid, oracle, out, format, config, pulse, shape;
    std::optional<int> n_max, jobs;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("--g", f.g, "charger-holder coupling (rad/time)");
    app.add_option("--gamma", f.gamma, "charger decay rate (1/time)");
    app.add_option("--omega-b", f.omega_b, "level spacing (rad/time)");
    app.add_option("--omega-drive", f.omega_drive, "pulse strength Omega");
    app.add_option("--grid", f.grid, "start:stop:count[:log]");
    app.add_option("--oracle", f.oracle, "on|off")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--n-max", f.n_max, "Fock cutoff (0: automatic)");
    app.add_option("--tol", f.tol, "integrator relative tolerance");
    app.add_option("--out", f.out, "output path ('-' for stdout)");
    app.add_option("--format", f.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", f.jobs, "worker threads");
    app.add_option("--config", f.config, "JSON run configuration");
    app.add_option("--pulse", f.pulse, "delta|finite")->check(CLI::IsMember({"delta", "finite"}));
    app.add_option("--tau", f.tau, "finite pulse width (time)");
    app.add_option("--shape", f.shape, "gaussian|rectangular")->check(CLI::IsMember({"gaussian", "rectangular"}));
}

RunConfig build_config(const Flags& f, Mode mode) {
    RunConfig c;
    c.jobs = default_jobs();
    if (f.config) c = load_run_config(*f.config);
    c.mode = mode;
    if (f.g) c.params.g = *f.g;
    if (f.gamma) c.params.gamma = *f.gamma;
    if (f.omega_b) c.params.omega_b = *f.omega_b;
    if (f.omega_drive) c.params.Omega = *f.omega_drive;
    if (f.grid) c.grid = GridSpec::parse(*f.grid);
    if (f.oracle) c.oracle = *f.oracle == "on";
    if (f.n_max) c.n_max = *f.n_max;
    if (f.tol) c.tol = *f.tol;
    if (f.out) c.out = *f.out;
    if (f.format) c.format = *f.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (f.jobs) c.jobs = *f.jobs;
    if (f.pulse || f.tau || f.shape) {
        const bool finite = f.pulse ? *f.pulse == "finite" : c.pulse.kind == PulseKind::FiniteWidth;
        if (finite) {
            const PulseShape shape = f.shape ? (*f.shape == "rectangular" ? PulseShape::Rectangular : PulseShape::Gaussian)
                                             : c.pulse.shape;
            c.pulse = PulseSpec::finite(f.tau ? *f.tau : c.pulse.tau, shape);
        } else {
            if (f.tau) throw Error(ErrorKind::ConfigInvalid, "--tau needs --pulse finite");
            c.pulse = PulseSpec::delta();
        }
    }
    validate(c);
    if (c.pulse.kind == PulseKind::FiniteWidth && !pulse_is_short(c.pulse, c.params.omega_b))
        std::cerr << "warning: omega_b * tau >= " << kPulseWidthWarning << ", the delta-pulse closed forms do not apply\n";
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulsed quadratic quantum battery: energetics, ergotropy and a Fock-space check"};
    app.require_subcommand(1);

    Flags flags;
    auto* trace = app.add_subcommand("trace", "E, ergotropy, D and P along a time grid");
    add_common(*trace, flags);

    std::string quantity = "tE";
    auto* sweep = app.add_subcommand("sweep", "optimal charging time or energy versus g/gamma");
    add_common(*sweep, flags);
    sweep->add_option("--quantity", quantity, "tE|Emax")->check(CLI::IsMember({"tE", "Emax"}));

    std::vector<double> ratios, omegas;
    auto* verify = app.add_subcommand("verify", "cross-check closed forms, moment propagator and Fock oracle");
    add_common(*verify, flags);
    verify->add_option("--g-ratios", ratios, "g/gamma values (default grid if unset)")->delimiter(',');
    verify->add_option("--omegas", omegas, "pulse strengths (default grid if unset)")->delimiter(',');

    std::string panel = "all";
    auto* figure = app.add_subcommand("figure", "data and plot scripts for the figure panels");
    add_common(*figure, flags);
    figure->add_option("--panel", panel, "fig2a|fig2b|fig2c|all")
        ->check(CLI::IsMember({"fig2a", "fig2b", "fig2c", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (trace->parsed()) return cmd_trace(build_config(flags, Mode::Trace));
        if (sweep->parsed())
            return cmd_sweep(build_config(flags, quantity == "tE" ? Mode::SweepTE : Mode::SweepEmax));
        if (verify->parsed()) {
            RunConfig c = build_config(flags, Mode::Verify);
            VerifyGrid grid;
            if (!ratios.empty()) grid.g_over_gamma = ratios;
            else if (flags.g) grid.g_over_gamma = {c.params.g / c.params.gamma};
            if (!omegas.empty()) grid.Omega = omegas;
            else if (flags.omega_drive) grid.Omega = {c.params.Omega};
            grid.lossless_rows = ratios.empty() && omegas.empty() && !flags.g && !flags.omega_drive;
            return cmd_verify(c, grid);
        }
        if (figure->parsed()) {
            const std::vector<Mode> panels = panel == "all" ? std::vector<Mode>{Mode::Fig2a, Mode::Fig2b, Mode::Fig2c}
                                                            : std::vector<Mode>{*mode_from_string(panel)};
            for (Mode m : panels) {
                const int rc = cmd_figure(build_config(flags, m));
                if (rc != kExitOk) return rc;
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
