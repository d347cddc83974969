// moments.hpp - closed second-moment dynamics of the two-mode battery.
//
// For t > 0 the normally ordered second moments split into two closed linear
// blocks: the populations (<a^dag a>, <b^dag b>, <a^dag b>, <b^dag a>), which
// follow i d/dt psi = H psi with the 4x4 dynamical matrix below, and the
// squeeze moments (<aa>, <bb>, <ab>). A finite-width drive couples the two
// blocks into the ten-real-dimensional system integrated by
// propagate_through_pulse.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "hyperbat/analytic.hpp"
#include "hyperbat/params.hpp"

namespace hyperbat {

using cd = std::complex<double>;

/// Second moments of a zero-mean two-mode Gaussian state. Conjugate partners
/// (<b^dag a>, <a^dag a^dag>, ...) are implied.
struct SecondMoments {
    double n_a{0.0}; // <a^dag a>
    double n_b{0.0}; // <b^dag b>
    cd coh_ab{};     // <a^dag b>
    cd sq_aa{};      // <a a>
    cd sq_bb{};      // <b b>
    cd sq_ab{};      // <a b>

    /// (n_a, n_b, <a^dag b>, <aa>, <bb>, <ab>) as a complex 6-vector.
    Eigen::Matrix<cd, 6, 1> to_vector() const;
    static SecondMoments from_vector(const Eigen::Matrix<cd, 6, 1>& v);

    friend SecondMoments operator*(double s, const SecondMoments& m);
};

struct DynamicalMatrix {
    Eigen::Matrix4cd population; // acts on (n_a, n_b, <a^dag b>, <b^dag a>) as i d/dt psi = H psi
    Eigen::Matrix3cd squeeze;    // acts on (<aa>, <bb>, <ab>) as d/dt v = M v
    Regime regime{Regime::Underdamped};
};

Eigen::Matrix4cd build_population_matrix(const BatteryParams& p);
Eigen::Matrix3cd derive_squeeze_block(const BatteryParams& p);
DynamicalMatrix build_dynamical_matrix(const BatteryParams& p);

struct PopulationSpectrum {
    Eigen::Vector4cd eigenvalues;
    double eigenvector_condition{0.0}; // 2-norm condition number of the eigenvector matrix
};

PopulationSpectrum population_spectrum(const BatteryParams& p);

/// State right after a delta pulse of strength Omega acting on vacuum.
SecondMoments post_pulse_moments(double Omega);

/// Exact propagation by matrix exponentials on each grid interval. The grid
/// must be ascending and start at or after t = 0 (time since the pulse).
std::vector<SecondMoments> propagate_moments(const SecondMoments& initial, const BatteryParams& p,
                                             const std::vector<double>& t_grid);

/// Integrates the driven moment system through a finite pulse starting from
/// vacuum; returns the moments at pulse.end_time().
SecondMoments propagate_through_pulse(const BatteryParams& p, const PulseSpec& pulse, double rtol = 1e-10);

/// Energetics of the holder from its second moments. P is filled in as
/// n_b / C when the enhancement factor C = sinh^2(Omega) is positive.
EnergyRecord gaussian_ergotropy_from_moments(const SecondMoments& m, double omega_b, double t = 0.0,
                                             double C = 0.0);

} // namespace hyperbat
