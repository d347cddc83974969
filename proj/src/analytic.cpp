#include "hyperbat/analytic.hpp"

#include <cmath>
#include <numbers>

#include "hyperbat/errors.hpp"

namespace hyperbat {

namespace {

// |s t^2| below which the trigonometric kernels are summed as series
constexpr double kSeriesThreshold = 0.5;

void check_time(double t) {
    if (!std::isfinite(t) || t < 0.0) throw Error(ErrorKind::InvalidTime, "t must be finite and >= 0");
}

// sum_k (-x)^k / (2k + first)!  with first = 0 (cos) or 1 (sinc / t)
double alternating_factorial_series(double x, int first) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= -x / double((2 * k + first - 1) * (2 * k + first));
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// arctan(sqrt(z)) / sqrt(z), continued to arctanh(sqrt(-z)) / sqrt(-z) for z < 0.
double atan_ratio_series(double z) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -z;
        const double add = term / double(2 * k + 1);
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double decay_envelope(const BatteryParams& p, double t) { return std::exp(-0.5 * p.gamma * t); }

bool near_ep(const BatteryParams& p) {
    return p.gamma > 0.0 && std::abs(p.g - 0.25 * p.gamma) <= kNearEpBand * p.gamma;
}

} // namespace

double rate_sinc(double s, double t) {
    const double x = s * t * t;
    if (std::abs(x) < kSeriesThreshold) return t * alternating_factorial_series(x, 1);
    if (s > 0.0) {
        const double r = std::sqrt(s);
        return std::sin(r * t) / r;
    }
    const double r = std::sqrt(-s);
    return std::sinh(r * t) / r;
}

double rate_cos(double s, double t) {
    const double x = s * t * t;
    if (std::abs(x) < kSeriesThreshold) return alternating_factorial_series(x, 0);
    if (s > 0.0) return std::cos(std::sqrt(s) * t);
    return std::cosh(std::sqrt(-s) * t);
}

double excitation_fraction(const BatteryParams& p, double t) {
    check_time(t);
    const RegimeRates rr = classify_regime(p);
    if (rr.regime == Regime::ExceptionalPoint) {
        const double q = 0.25 * p.gamma * t;
        return q * q * decay_envelope(p, t);
    }
    const double amp = p.g * rate_sinc(signed_rate_squared(p), t);
    return amp * amp * decay_envelope(p, t);
}

double population_holder(const BatteryParams& p, double t) {
    return enhancement_factor(p) * excitation_fraction(p, t);
}

double population_charger(const BatteryParams& p, double t) {
    check_time(t);
    const RegimeRates rr = classify_regime(p);
    const double C = enhancement_factor(p);
    const double s = signed_rate_squared(p);
    if (rr.regime == Regime::Underdamped && std::abs(s * t * t) >= kSeriesThreshold) {
        const double G = rr.rate;
        const double ratio = p.g / G;
        const double bracket = 0.5 * ratio * ratio
                               + (8.0 * p.g * p.g - p.gamma * p.gamma) / (16.0 * G * G) * std::cos(2.0 * G * t)
                               - p.gamma / (4.0 * G) * std::sin(2.0 * G * t);
        return C * bracket * decay_envelope(p, t);
    }
    // charger amplitude cos(Gt) - (gamma/4G) sin(Gt), continued through the EP
    const double u = rr.regime == Regime::ExceptionalPoint ? 1.0 - 0.25 * p.gamma * t
                                                           : rate_cos(s, t) - 0.25 * p.gamma * rate_sinc(s, t);
    return C * u * u * decay_envelope(p, t);
}

double stored_energy(const BatteryParams& p, double t) { return p.omega_b * population_holder(p, t); }

double passive_discriminant(const BatteryParams& p, double t) {
    const double P = excitation_fraction(p, t);
    return 1.0 + 4.0 * enhancement_factor(p) * P * (1.0 - P);
}

EnergyRecord ergotropy(const BatteryParams& p, double t) {
    EnergyRecord r;
    r.t = t;
    r.P = excitation_fraction(p, t);
    const double C = enhancement_factor(p);
    const double x = 4.0 * C * r.P * (1.0 - r.P); // D - 1
    const double root = std::sqrt(1.0 + x);
    r.D = 1.0 + x;
    r.E = p.omega_b * C * r.P;
    // (sqrt(D) - 1) / 2 without cancellation
    r.E_beta = p.omega_b * 0.5 * x / (root + 1.0);
    // E - E_beta rearranged into a sum of non-negative terms
    r.ergotropy = p.omega_b * C * r.P * (x / (root + 1.0) + 2.0 * r.P) / (root + 1.0);
    return r;
}

double optimal_time(const BatteryParams& p) {
    const RegimeRates rr = classify_regime(p);
    if (p.g == 0.0) throw Error(ErrorKind::NoCharging, "g = 0: the holder never charges");
    if (p.gamma == 0.0) return std::numbers::pi / (2.0 * p.g);
    if (rr.regime == Regime::ExceptionalPoint) return 4.0 / p.gamma;
    if (near_ep(p)) {
        const double z = 16.0 * signed_rate_squared(p) / (p.gamma * p.gamma);
        return 4.0 / p.gamma * atan_ratio_series(z);
    }
    if (rr.regime == Regime::Underdamped) return std::atan(4.0 * rr.rate / p.gamma) / rr.rate;
    const double y = 4.0 * rr.rate / p.gamma;
    if (!(y < 1.0)) throw Error(ErrorKind::InvalidParams, "overdamped branch with 4 Gamma / gamma >= 1");
    return std::atanh(y) / rr.rate;
}

OptimalPoint optimal_energy(const BatteryParams& p) {
    OptimalPoint out;
    out.t_E = optimal_time(p);
    const RegimeRates rr = classify_regime(p);
    out.regime = rr.regime;
    const double scale = p.omega_b * enhancement_factor(p);
    double exponent = 0.0;
    if (p.gamma == 0.0) {
        exponent = 0.0;
    } else if (rr.regime == Regime::ExceptionalPoint) {
        exponent = -2.0;
    } else if (near_ep(p)) {
        exponent = -0.5 * p.gamma * out.t_E;
    } else if (rr.regime == Regime::Underdamped) {
        const double G = rr.rate;
        exponent = -p.gamma / (2.0 * G) * std::atan(4.0 * G / p.gamma); // arccot(gamma / 4G)
    } else {
        const double Gam = rr.rate;
        exponent = -p.gamma / (2.0 * Gam) * std::atanh(4.0 * Gam / p.gamma); // arccoth(gamma / 4Gamma)
    }
    out.E_max = scale * std::exp(exponent);
    return out;
}

double asymptotic_optimal_time(const BatteryParams& p, CouplingLimit limit) {
    validate(p);
    if (p.g == 0.0) throw Error(ErrorKind::NoCharging, "g = 0: the holder never charges");
    if (limit == CouplingLimit::WeakCoupling) {
        if (p.gamma == 0.0) throw Error(ErrorKind::InvalidParams, "weak-coupling limit needs gamma > 0");
        return 4.0 / p.gamma * std::log(p.gamma / (2.0 * p.g));
    }
    return std::numbers::pi / (2.0 * p.g) - p.gamma / (4.0 * p.g * p.g);
}

double asymptotic_optimal_energy(const BatteryParams& p, CouplingLimit limit) {
    validate(p);
    const double scale = p.omega_b * enhancement_factor(p);
    if (limit == CouplingLimit::WeakCoupling) {
        if (p.gamma == 0.0) throw Error(ErrorKind::InvalidParams, "weak-coupling limit needs gamma > 0");
        const double r = 2.0 * p.g / p.gamma;
        return scale * r * r;
    }
    if (p.g == 0.0) throw Error(ErrorKind::NoCharging, "g = 0: the holder never charges");
    return scale * (1.0 - std::numbers::pi * p.gamma / (4.0 * p.g));
}

const char* drive_strength_label(double Omega) {
    if (Omega < kWeakDriveOmega) return "weak";
    if (Omega > kStrongDriveOmega) return "strong";
    return "intermediate";
}

} // namespace hyperbat
