#include "hyperbat/params.hpp"

#include <cmath>
#include <numbers>

#include "hyperbat/errors.hpp"

namespace hyperbat {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidParams: return "invalid-params";
    case ErrorKind::InvalidTime: return "invalid-time";
    case ErrorKind::NoCharging: return "no-charging";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::TruncationInsufficient: return "truncation-insufficient";
    case ErrorKind::UnphysicalMoments: return "unphysical-moments";
    case ErrorKind::ConfigInvalid: return "config-invalid";
    case ErrorKind::FileIo: return "file-io";
    }
    return "unknown";
}

void validate(const BatteryParams& p) {
    auto bad = [](double x) { return !std::isfinite(x); };
    if (bad(p.omega_b) || p.omega_b <= 0.0)
        throw Error(ErrorKind::InvalidParams, "omega_b must be finite and > 0");
    if (bad(p.g) || p.g < 0.0)
        throw Error(ErrorKind::InvalidParams, "g must be finite and >= 0");
    if (bad(p.gamma) || p.gamma < 0.0)
        throw Error(ErrorKind::InvalidParams, "gamma must be finite and >= 0");
    if (bad(p.Omega) || p.Omega < 0.0)
        throw Error(ErrorKind::InvalidParams, "Omega must be finite and >= 0");
}

std::string to_string(Regime r) {
    switch (r) {
    case Regime::Underdamped: return "underdamped";
    case Regime::ExceptionalPoint: return "exceptional-point";
    case Regime::Overdamped: return "overdamped";
    }
    return "unknown";
}

std::optional<Regime> regime_from_string(const std::string& s) {
    for (Regime r : {Regime::Underdamped, Regime::ExceptionalPoint, Regime::Overdamped})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

double signed_rate_squared(const BatteryParams& p) {
    const double q = 0.25 * p.gamma;
    return (p.g - q) * (p.g + q);
}

RegimeRates classify_regime(const BatteryParams& p) {
    validate(p);
    RegimeRates out;
    out.g_ep = 0.25 * p.gamma;
    if (p.gamma == 0.0) {
        // Lossless: G = g, including the static g = 0 case.
        out.regime = Regime::Underdamped;
        out.rate = p.g;
        return out;
    }
    if (std::abs(p.g - out.g_ep) <= kEpTolerance * p.gamma) {
        out.regime = Regime::ExceptionalPoint;
        out.rate = 0.0;
        return out;
    }
    const double s = signed_rate_squared(p);
    out.regime = s > 0.0 ? Regime::Underdamped : Regime::Overdamped;
    out.rate = std::sqrt(std::abs(s));
    return out;
}

double enhancement_factor(const BatteryParams& p) {
    validate(p);
    const double s = std::sinh(p.Omega);
    return s * s;
}

std::string to_string(PulseKind k) { return k == PulseKind::Delta ? "delta" : "finite"; }

std::string to_string(PulseShape s) { return s == PulseShape::Gaussian ? "gaussian" : "rectangular"; }

std::optional<PulseKind> pulse_kind_from_string(const std::string& s) {
    if (s == "delta") return PulseKind::Delta;
    if (s == "finite") return PulseKind::FiniteWidth;
    return std::nullopt;
}

std::optional<PulseShape> pulse_shape_from_string(const std::string& s) {
    if (s == "gaussian") return PulseShape::Gaussian;
    if (s == "rectangular") return PulseShape::Rectangular;
    return std::nullopt;
}

namespace {

// FWHM = tau
double gaussian_sigma(double tau) { return tau / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

} // namespace

double PulseSpec::end_time() const {
    if (kind == PulseKind::Delta) return 0.0;
    return shape == PulseShape::Rectangular ? tau : 6.0 * tau;
}

double PulseSpec::envelope(double t) const {
    if (kind == PulseKind::Delta || t < 0.0 || t > end_time()) return 0.0;
    if (shape == PulseShape::Rectangular) return 1.0 / tau;
    const double sigma = gaussian_sigma(tau);
    const double half = 3.0 * tau;
    // renormalised over the finite support so the integral is exactly one
    const double mass = std::erf(half / (std::numbers::sqrt2 * sigma));
    const double x = (t - half) / sigma;
    return std::exp(-0.5 * x * x) / (sigma * std::sqrt(2.0 * std::numbers::pi) * mass);
}

void validate(const PulseSpec& pulse) {
    if (pulse.kind == PulseKind::Delta) {
        if (pulse.tau != 0.0) throw Error(ErrorKind::InvalidParams, "delta pulse carries no width");
        return;
    }
    if (!std::isfinite(pulse.tau) || pulse.tau <= 0.0)
        throw Error(ErrorKind::InvalidParams, "finite pulse needs tau > 0");
}

bool pulse_is_short(const PulseSpec& pulse, double omega_b) {
    return pulse.kind == PulseKind::Delta || omega_b * pulse.tau <= kPulseWidthWarning;
}

} // namespace hyperbat
