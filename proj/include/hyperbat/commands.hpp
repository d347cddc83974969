// commands.hpp - the trace / sweep / verify / figure front ends. Each
// builder returns data; the cmd_* wrappers write it and map outcomes to
// process exit codes.

#pragma once

#include <string>
#include <vector>

#include "hyperbat/errors.hpp"
#include "hyperbat/harness.hpp"

namespace hyperbat {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerifyFail = 2, kExitNumerical = 3 };

/// Exit code for an exception escaping a command.
int exit_code_for(const Error& e);

/// Columns: t_gamma, E_norm, ergotropy_norm, D, P [, oracle_*]. Energies are in
/// units of omega_b sinh^2(Omega) (zero when Omega = 0); time in 1/gamma
/// (absolute time when gamma = 0).
Table trace_table(const RunConfig& config);

/// Coupling sweep over g/gamma with both asymptotes as extra columns.
Table sweep_table(const RunConfig& config);

inline constexpr double kVerifyTolerance = 1e-3;
inline constexpr double kFirstMomentTolerance = 1e-8;
inline constexpr double kConservationTolerance = 1e-8;

struct VerifyGrid {
    std::vector<double> g_over_gamma{0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
    std::vector<double> Omega{0.5, 1.0, 1.5};
    bool lossless_rows{true};
    int t_count{51};
    double t_stop_gamma{5.0};
};

struct VerifyCase {
    double g{0.0};
    double gamma{0.0};
    double Omega{0.0};
    int n_max{0};
    double truncation_weight{0.0};
    double rel_err_oracle{0.0};   // max_t |n_b oracle - n_b analytic| / |n_b analytic|
    double rel_err_moments{0.0};  // same for the moment propagator
    double sq_bb_diff{0.0};       // max_t |<bb> oracle - <bb> moments| / (sinh cosh)
    double first_moments{0.0};    // max_t |<a>| + |<b>|
    double conservation{0.0};     // gamma = 0 rows: max |n_a + n_b - initial|
    bool certified{false};
    bool pass{false};
    std::string note;
};

struct VerificationReport {
    double tolerance{kVerifyTolerance};
    std::vector<VerifyCase> cases;

    bool pass() const;
    double max_rel_err() const;
};

VerifyCase verify_case(const BatteryParams& p, const VerifyGrid& grid, const RunConfig& config);
VerificationReport run_verification(const RunConfig& config, const VerifyGrid& grid = {});
Table to_table(const VerificationReport& report);

struct FigurePanel {
    std::string name;   // fig2a, fig2b, fig2c
    Table table;
    std::string script; // gnuplot commands reading name + ".csv"
};

/// Pulse strengths of the fig2a preset.
std::vector<double> fig2a_omegas();
FigurePanel figure_panel(Mode panel, const RunConfig& config);

int cmd_trace(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_verify(const RunConfig& config, const VerifyGrid& grid = {});
/// Writes <out>/<panel>.csv and <out>/<panel>.gp for one panel.
int cmd_figure(const RunConfig& config);

} // namespace hyperbat
