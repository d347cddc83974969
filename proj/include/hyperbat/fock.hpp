// fock.hpp - brute-force density-matrix integration of the battery master
// equation on a truncated two-mode Fock space.
//
// Storage. The Hamiltonian conserves the total excitation number N and the
// charger loss lowers N on both sides of rho at once, so the block offset
// d = N - M of rho_{N,M} is conserved for t > 0. The space is truncated at
// N <= n_max (which is exact for the undriven dynamics, since N never grows)
// and only blocks with 0 <= d <= max_offset are stored; negative offsets
// follow from hermiticity. Within block N states are the normal-mode Fock
// states |p, m> of c+- = (a +- b)/sqrt(2), p + m = N, indexed by m.
//
// Free evolution is propagated exactly interval by interval: in the picture of
// the no-jump generator H - i gamma/2 a^dag a the loss terms commute at all
// times, which reduces each interval to a change of mode basis plus two
// single-mode loss channels. Driven intervals (finite pulses) and the
// alternative Propagator::RungeKutta integrate the Lindbladian with an
// adaptive Dormand-Prince stepper in the interaction picture of H. States
// handed back to callers are always lab-frame Schrodinger-picture states.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hyperbat/analytic.hpp"
#include "hyperbat/moments.hpp"
#include "hyperbat/params.hpp"

namespace hyperbat::fock {

/// Truncated single-mode annihilation operator on levels 0..n_max.
Eigen::MatrixXd build_mode_operators(int n_max);

/// Heuristic cutoff max(20, ceil(10 sinh^2 + 6 sinh cosh)).
int heuristic_cutoff(double Omega);

/// Population of the top two Fock levels above which a squeezed vacuum is
/// rejected as under-resolved.
inline constexpr double kTruncationLimit = 1e-6;
/// Target used when growing the cutoff automatically.
inline constexpr double kTruncationTarget = 1e-7;

/// Starts at heuristic_cutoff and grows it by 10% until the squeezed vacuum
/// leaves less than kTruncationTarget in its top two levels.
int certified_cutoff(double Omega, int max_cutoff = 400);

class BlockLayout {
public:
    BlockLayout() = default;
    BlockLayout(int n_max, int max_offset);

    int n_max() const { return n_max_; }
    int max_offset() const { return max_offset_; }
    std::size_t size() const { return size_; }
    bool stored(int N, int M) const { return N - M >= 0 && N - M <= max_offset_ && N <= n_max_ && M >= 0; }
    /// Start of block (N, M), N >= M; row-major (N+1) x (M+1).
    std::size_t start(int N, int M) const { return start_[static_cast<std::size_t>(N - M)][static_cast<std::size_t>(N)]; }

private:
    int n_max_{0};
    int max_offset_{0};
    std::size_t size_{0};
    std::vector<std::vector<std::size_t>> start_;
};

struct TruncatedState {
    BlockLayout layout;
    Eigen::VectorXcd rho; // flattened blocks, lab frame
    double t{0.0};

    int n_max_a() const { return layout.n_max(); }
    int n_max_b() const { return layout.n_max(); }

    /// rho_{N,M}(i, j) for any N, M (zero outside the stored set).
    std::complex<double> element(int N, int M, int i, int j) const;
    Eigen::MatrixXcd block(int N, int M) const;

    double trace() const;
    double hermiticity_defect() const;   // max |rho_NN - rho_NN^dag|
    double min_block_eigenvalue() const; // smallest eigenvalue over diagonal blocks
    double truncation_weight() const;    // population of shells N >= n_max - 1

    static TruncatedState vacuum(int n_max, int max_offset);
};

/// Squeezed vacuum in mode a: exp(-i Omega/2 (a^dag^2 + a^2)) |0,0>, using the
/// eigendecomposition of the truncated generator. Throws
/// TruncationInsufficient when `certify` is set and the top two levels hold
/// more than kTruncationLimit.
TruncatedState squeeze_vacuum(double Omega, int n_max, int max_offset = 2, bool certify = true);

/// Undriven propagation: exact per-interval channel (default) or adaptive
/// Dormand-Prince on the interaction-picture Lindbladian.
enum class Propagator { ExactChannel, RungeKutta };

struct OracleOptions {
    double rtol{1e-8};
    double atol{1e-12};
    double trace_drift{1e-9}; // per-step rejection threshold
    int n_max{0};             // 0: certified_cutoff(Omega)
    int max_offset{2};
    bool certify{true};
    Propagator propagator{Propagator::ExactChannel};
};

/// Evolves state to t_final under the undriven Lindbladian.
void integrate(TruncatedState& state, const BatteryParams& p, double t_final, const OracleOptions& opts = {});

struct OracleReport {
    double t{0.0};
    SecondMoments moments;
    std::complex<double> mean_a{};
    std::complex<double> mean_b{};
    EnergyRecord energy;
    double truncation_weight{0.0};
    double trace{1.0};
    double hermiticity_defect{0.0};
    int n_max{0};

    bool certified() const { return truncation_weight < kTruncationLimit; }
};

/// Moments by trace formulas; energetics via gaussian_ergotropy_from_moments.
/// Needs max_offset >= 2 for the squeeze moments (they read as zero otherwise).
OracleReport extract_report(const TruncatedState& state, const BatteryParams& p);

/// Delta pulse at t = 0 followed by free evolution; one report per grid time.
std::vector<OracleReport> run_oracle(const BatteryParams& p, const std::vector<double>& t_grid,
                                     const OracleOptions& opts = {});

struct PulseRun {
    OracleReport post_pulse;           // at pulse.end_time()
    std::vector<OracleReport> reports; // at t_grid (absolute times, >= end_time)
};

/// Integrates through a finite-width drive starting from vacuum at t = 0 with
/// every block offset resolved, then continues undriven along t_grid.
PulseRun finite_width_pulse_run(const BatteryParams& p, const PulseSpec& pulse, const std::vector<double>& t_grid,
                                const OracleOptions& opts = {});

} // namespace hyperbat::fock
