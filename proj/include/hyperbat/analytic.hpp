// analytic.hpp - closed-form energetics of the pulsed battery: populations,
// stored energy in all three coupling regimes, optimal charging point and
// the Gaussian ergotropy.
//
// All functions take t >= 0 measured from the (instantaneous) pulse and
// assume a vacuum initial state.

#pragma once

#include "hyperbat/params.hpp"

namespace hyperbat {

/// Energetics at one instant. Energies carry the factor omega_b.
struct EnergyRecord {
    double t{0.0};
    double E{0.0};         // stored energy omega_b <b^dag b>
    double E_beta{0.0};    // passive-state energy
    double ergotropy{0.0}; // E - E_beta
    double D{1.0};         // passive-state discriminant, >= 1
    double P{0.0};         // holder excitation fraction <b^dag b> / sinh^2(Omega)
};

struct OptimalPoint {
    double t_E{0.0};
    double E_max{0.0};
    Regime regime{Regime::Underdamped};
};

enum class CouplingLimit { WeakCoupling, StrongCoupling };

/// Band |g - gamma/4| <= kNearEpBand * gamma inside which t_E and E(t_E) are
/// evaluated from their power series about the exceptional point.
inline constexpr double kNearEpBand = 1e-4;

// Regime-continued kernels. s = g^2 - (gamma/4)^2.
//   rate_sinc(s, t) = sin(sqrt(s) t) / sqrt(s)  ->  sinh(..)/.. for s < 0, t at s = 0
//   rate_cos(s, t)  = cos(sqrt(s) t)            ->  cosh(..)      for s < 0, 1 at s = 0
// Both are entire in s; small |s t^2| is summed as a series.
double rate_sinc(double s, double t);
double rate_cos(double s, double t);

double population_charger(const BatteryParams& p, double t);
double population_holder(const BatteryParams& p, double t);
double stored_energy(const BatteryParams& p, double t);

/// P(t) = <b^dag b>(t) / sinh^2(Omega); independent of Omega.
double excitation_fraction(const BatteryParams& p, double t);

/// D = 1 + 4 sinh^2(Omega) P (1 - P).
double passive_discriminant(const BatteryParams& p, double t);

EnergyRecord ergotropy(const BatteryParams& p, double t);

/// First (and global) maximum of E(t). Throws NoCharging when g == 0.
double optimal_time(const BatteryParams& p);
OptimalPoint optimal_energy(const BatteryParams& p);

double asymptotic_optimal_time(const BatteryParams& p, CouplingLimit limit);
double asymptotic_optimal_energy(const BatteryParams& p, CouplingLimit limit);

/// Ergotropy-efficiency labels used in reports: Omega < 0.1 is "weak",
/// Omega > 3 is "strong".
inline constexpr double kWeakDriveOmega = 0.1;
inline constexpr double kStrongDriveOmega = 3.0;
const char* drive_strength_label(double Omega);

} // namespace hyperbat
