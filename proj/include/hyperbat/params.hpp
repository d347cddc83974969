// params.hpp - physical parameters of the pulsed two-mode battery and the
// exceptional-point regime classification built on them.

#pragma once

#include <optional>
#include <string>

namespace hyperbat {

/// One battery instance. Charger (mode a) and holder (mode b) share the
/// level spacing omega_b; only the charger decays.
struct BatteryParams {
    double omega_b{1.0}; // level spacing, > 0
    double g{2.0};       // charger-holder coupling, >= 0
    double gamma{1.0};   // charger decay rate, >= 0
    double Omega{1.0};   // dimensionless pulse strength, >= 0

    bool operator==(const BatteryParams&) const = default;
};

/// Throws Error(InvalidParams) on any out-of-range or non-finite field.
void validate(const BatteryParams& p);

enum class Regime { Underdamped, ExceptionalPoint, Overdamped };

std::string to_string(Regime r);
std::optional<Regime> regime_from_string(const std::string& s);

struct RegimeRates {
    Regime regime{Regime::Underdamped};
    double rate{0.0}; // G when underdamped, Gamma when overdamped, 0 at the EP
    double g_ep{0.0}; // gamma / 4
};

/// Relative half-width (in units of gamma) of the band treated as the EP.
inline constexpr double kEpTolerance = 1e-9;

RegimeRates classify_regime(const BatteryParams& p);

/// g^2 - (gamma/4)^2, evaluated as a product to avoid cancellation near the EP.
/// Positive above the EP (equals G^2), negative below (equals -Gamma^2).
double signed_rate_squared(const BatteryParams& p);

/// C = sinh^2(Omega), the squeezing enhancement of every stored quantity.
double enhancement_factor(const BatteryParams& p);

enum class PulseKind { Delta, FiniteWidth };
enum class PulseShape { Gaussian, Rectangular };

std::string to_string(PulseKind k);
std::string to_string(PulseShape s);
std::optional<PulseKind> pulse_kind_from_string(const std::string& s);
std::optional<PulseShape> pulse_shape_from_string(const std::string& s);

/// Drive pulse. Both finite shapes have unit time integral, so the total
/// squeeze strength is Omega regardless of tau.
///   Rectangular: f(t) = 1/tau on [0, tau].
///   Gaussian:    FWHM tau, centred at 3 tau, support [0, 6 tau].
struct PulseSpec {
    PulseKind kind{PulseKind::Delta};
    double tau{0.0};
    PulseShape shape{PulseShape::Gaussian};

    bool operator==(const PulseSpec&) const = default;

    static PulseSpec delta() { return {}; }
    static PulseSpec finite(double tau, PulseShape shape) { return {PulseKind::FiniteWidth, tau, shape}; }

    /// Time at which the drive has switched off (0 for a delta pulse).
    double end_time() const;
    /// Pulse envelope f(t); zero outside the support.
    double envelope(double t) const;
};

/// omega_b * tau above which a finite pulse is flagged as too wide.
inline constexpr double kPulseWidthWarning = 0.1;

void validate(const PulseSpec& pulse);

/// True when the pulse is short enough for the delta-pulse results to apply.
bool pulse_is_short(const PulseSpec& pulse, double omega_b);

} // namespace hyperbat
