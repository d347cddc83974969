#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hyperbat/analytic.hpp"
#include "hyperbat/errors.hpp"
#include "hyperbat/moments.hpp"
#include "support.hpp"

using namespace hyperbat;

namespace {

// Stored-energy profile written out branch by branch, without the series.
double branch_fraction(double g, double gamma, double t) {
    const double s = g * g - gamma * gamma / 16.0;
    double B;
    if (s > 0.0) {
        const double G = std::sqrt(s);
        B = std::pow(g / G * std::sin(G * t), 2);
    } else if (s < 0.0) {
        const double Gam = std::sqrt(-s);
        B = std::pow(g / Gam * std::sinh(Gam * t), 2);
    } else {
        B = std::pow(gamma * t / 4.0, 2);
    }
    return B * std::exp(-0.5 * gamma * t);
}

// Golden-section search for the first maximum, bracketed by a coarse scan.
double golden_max(double g, double gamma) {
    auto f = [&](double t) { return branch_fraction(g, gamma, t); };
    const double T = 50.0 / std::max(g, gamma);
    double best = 0.0, fbest = -1.0;
    const int n = 20000;
    for (int k = 1; k <= n; ++k) {
        const double t = T * k / n;
        if (f(t) > fbest) { fbest = f(t); best = t; }
        else if (f(t) < 0.5 * fbest) break;
    }
    double a = best - T / n, b = best + T / n;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        if (f(c) > f(d)) { b = d; } else { a = c; }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return 0.5 * (a + b);
}

BatteryParams make(double g, double gamma = 1.0, double Omega = 1.0, double omega_b = 1.0) {
    return {omega_b, g, gamma, Omega};
}

} // namespace

TEST_CASE("charger population starts with all pulse energy") {
    testing::Sampler rng(21);
    for (int k = 0; k < 200; ++k) {
        const BatteryParams p = rng.params();
        CHECK(population_charger(p, 0.0) == doctest::Approx(enhancement_factor(p)).epsilon(1e-13));
        CHECK(population_holder(p, 0.0) == 0.0);
    }
    CHECK(population_charger(make(2.0, 1.0, 0.0), 1.3) == 0.0);
}

TEST_CASE("invalid times") {
    for (auto fn : {population_charger, population_holder, stored_energy, excitation_fraction, passive_discriminant}) {
        try {
            fn(make(2.0), -1e-3);
            FAIL("negative time accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidTime);
        }
    }
    CHECK_THROWS_AS(ergotropy(make(2.0), -1.0), Error);
}

TEST_CASE("holder population against the branch formulas") {
    for (double g : {0.02, 0.1, 0.2, 0.25, 0.3, 0.5, 2.0, 10.0}) {
        for (double t : testing::linspace(0.0, 8.0, 81)) {
            const BatteryParams p = make(g, 1.0, 1.0);
            const double ref = enhancement_factor(p) * branch_fraction(g, 1.0, t);
            CHECK(population_holder(p, t) == doctest::Approx(ref).epsilon(1e-12).scale(1e-300));
        }
    }
    // exceptional point value at t = 4/gamma
    const BatteryParams ep = make(0.25, 1.0, 1.0);
    CHECK(population_holder(ep, 4.0) == doctest::Approx(std::pow(std::sinh(1.0), 2) * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("charger population in every regime matches the amplitude form") {
    // charger amplitude cos(Gt) - gamma/(4G) sin(Gt), continued in G
    for (double g : {0.1, 0.2, 0.25, 0.5, 2.0}) {
        const double s = g * g - 1.0 / 16.0;
        for (double t : testing::linspace(0.0, 6.0, 61)) {
            double u;
            if (s > 0) u = std::cos(std::sqrt(s) * t) - 0.25 / std::sqrt(s) * std::sin(std::sqrt(s) * t);
            else if (s < 0) u = std::cosh(std::sqrt(-s) * t) - 0.25 / std::sqrt(-s) * std::sinh(std::sqrt(-s) * t);
            else u = 1.0 - 0.25 * t;
            const double ref = std::pow(std::sinh(1.0), 2) * u * u * std::exp(-0.5 * t);
            CHECK(population_charger(make(g), t) == doctest::Approx(ref).epsilon(1e-10).scale(1e-12));
        }
    }
}

TEST_CASE("lossless storage") {
    const BatteryParams p = make(0.8, 0.0, 1.2, 3.0);
    for (double t : testing::linspace(0.0, 10.0, 51)) {
        const double ref = 3.0 * std::pow(std::sinh(1.2) * std::sin(0.8 * t), 2);
        CHECK(stored_energy(p, t) == doctest::Approx(ref).epsilon(1e-12).scale(1e-14));
    }
    CHECK(optimal_time(p) == std::numbers::pi / 1.6);
    CHECK(optimal_energy(p).E_max == doctest::Approx(3.0 * std::pow(std::sinh(1.2), 2)).epsilon(1e-15));
    CHECK(excitation_fraction(p, std::numbers::pi / 1.6) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(passive_discriminant(p, std::numbers::pi / 1.6) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("energetic zeros at n pi / G") {
    const BatteryParams p = make(2.0);
    const double G = classify_regime(p).rate;
    const double peak = optimal_energy(p).E_max;
    for (int n = 1; n <= 3; ++n) CHECK(stored_energy(p, n * std::numbers::pi / G) < 1e-28 * peak + 1e-30);
}

TEST_CASE("optimal time at the exceptional point and in the lossless limit") {
    CHECK(optimal_time(make(0.25)) == 4.0);
    CHECK(optimal_time(make(0.5, 2.0)) == 2.0);
    CHECK(optimal_time(make(3.0, 0.0)) == std::numbers::pi / 6.0);
    const OptimalPoint ep = optimal_energy(make(0.25, 1.0, 1.0, 2.0));
    CHECK(ep.regime == Regime::ExceptionalPoint);
    CHECK(ep.E_max == doctest::Approx(2.0 * std::pow(std::sinh(1.0), 2) * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("optimal time agrees with golden-section maximization") {
    CHECK(golden_max(2.0, 1.0) == doctest::Approx(0.728448).epsilon(1e-6));
    CHECK(optimal_time(make(2.0)) == doctest::Approx(golden_max(2.0, 1.0)).epsilon(1e-7));
    for (double g : {0.01, 0.05, 0.1, 0.2, 0.24, 0.26, 0.3, 0.5, 1.0, 3.0, 10.0, 50.0})
        CHECK(optimal_time(make(g)) == doctest::Approx(golden_max(g, 1.0)).epsilon(1e-6));
}

TEST_CASE("optimal energy equals the stored energy at the optimum") {
    testing::Sampler rng(22);
    for (int k = 0; k < 300; ++k) {
        const BatteryParams p = rng.params();
        const OptimalPoint op = optimal_energy(p);
        CHECK(op.E_max == doctest::Approx(stored_energy(p, op.t_E)).epsilon(1e-12));
        CHECK(op.E_max <= p.omega_b * enhancement_factor(p) * (1.0 + 1e-15));
        CHECK(op.E_max >= 0.0);
    }
    const BatteryParams p = make(2.0);
    const double G = classify_regime(p).rate;
    const double P_tE = std::exp(-1.0 / (2.0 * G) * std::atan(4.0 * G)); // arccot(1/4G)
    CHECK(excitation_fraction(p, optimal_time(p)) == doctest::Approx(P_tE).epsilon(1e-13));
}

TEST_CASE("property: the optimum is the global maximum") {
    testing::Sampler rng(23);
    for (int k = 0; k < 100; ++k) {
        const BatteryParams p = rng.params();
        const OptimalPoint op = optimal_energy(p);
        for (double d : {1e-3, 1e-2}) {
            CHECK(stored_energy(p, op.t_E + d / p.gamma) <= op.E_max);
            if (op.t_E > d / p.gamma) CHECK(stored_energy(p, op.t_E - d / p.gamma) <= op.E_max);
        }
        for (double t : testing::linspace(0.0, op.t_E + 30.0 / p.gamma, 2001))
            CHECK(stored_energy(p, t) <= op.E_max * (1.0 + 1e-13));
    }
}

TEST_CASE("no charging without coupling") {
    for (auto kind : {0, 1, 2}) {
        try {
            const BatteryParams p = make(0.0);
            if (kind == 0) optimal_time(p);
            if (kind == 1) optimal_energy(p);
            if (kind == 2) asymptotic_optimal_time(p, CouplingLimit::StrongCoupling);
            FAIL("g = 0 accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoCharging);
        }
    }
    CHECK(stored_energy(make(0.0), 3.0) == 0.0);
}

TEST_CASE("asymptotic forms") {
    CHECK(asymptotic_optimal_time(make(0.01), CouplingLimit::WeakCoupling) == doctest::Approx(4.0 * std::log(50.0)));
    CHECK(asymptotic_optimal_time(make(0.01), CouplingLimit::WeakCoupling) == doctest::Approx(15.648).epsilon(1e-4));
    CHECK(asymptotic_optimal_time(make(10.0), CouplingLimit::StrongCoupling) == doctest::Approx(0.15458).epsilon(1e-4));
    CHECK(asymptotic_optimal_time(make(2.0, 0.0), CouplingLimit::StrongCoupling) == std::numbers::pi / 4.0);
    const double C = std::pow(std::sinh(1.0), 2);
    CHECK(asymptotic_optimal_energy(make(0.01), CouplingLimit::WeakCoupling) == doctest::Approx(C * 4e-4).epsilon(1e-13));
    CHECK(asymptotic_optimal_energy(make(10.0), CouplingLimit::StrongCoupling)
          == doctest::Approx(C * (1.0 - std::numbers::pi / 40.0)).epsilon(1e-13));
    for (auto lim : {CouplingLimit::WeakCoupling, CouplingLimit::StrongCoupling})
        CHECK(asymptotic_optimal_energy(make(1.0, 1.0, 0.0), lim) == 0.0);

    const double tw = optimal_time(make(0.01));
    CHECK(std::abs(tw - asymptotic_optimal_time(make(0.01), CouplingLimit::WeakCoupling)) / tw < 0.05);
    const double ts = optimal_time(make(10.0));
    CHECK(std::abs(ts - asymptotic_optimal_time(make(10.0), CouplingLimit::StrongCoupling)) / ts < 0.01);
    const double Ew = optimal_energy(make(0.01)).E_max;
    CHECK(std::abs(Ew - asymptotic_optimal_energy(make(0.01), CouplingLimit::WeakCoupling)) / Ew < 0.05);
    const double Es = optimal_energy(make(10.0)).E_max;
    CHECK(std::abs(Es - asymptotic_optimal_energy(make(10.0), CouplingLimit::StrongCoupling)) / Es < 0.01);
}

TEST_CASE("regime kernels continue smoothly through s = 0") {
    for (double t : {0.1, 1.0, 4.0, 8.0}) {
        for (double s : {1e-12, -1e-12, 1e-6, -1e-6}) {
            const double r = std::sqrt(std::abs(s));
            const double sinc = s > 0 ? std::sin(r * t) / r : std::sinh(r * t) / r;
            const double cs = s > 0 ? std::cos(r * t) : std::cosh(r * t);
            CHECK(rate_sinc(s, t) == doctest::Approx(sinc).epsilon(1e-9));
            CHECK(rate_cos(s, t) == doctest::Approx(cs).epsilon(1e-12));
        }
        CHECK(rate_sinc(0.0, t) == t);
        CHECK(rate_cos(0.0, t) == 1.0);
    }
}

TEST_CASE("property: near the exceptional point the energy moves with the coupling derivative") {
    // E(g) - E(g_EP) ~ dE/dg (g - g_EP); slope from the series of the EP branch:
    // dP/dg at g_EP = 2 g t^2 (1 + (g t)^2 ... ) evaluated by a centred difference far from the band
    for (double gt : {0.5, 1.0, 4.0, 8.0}) {
        const double t = gt;
        const double E0 = stored_energy(make(0.25), t);
        const double h = 1e-3 * 0.25;
        const double slope = (branch_fraction(0.25 + h, 1.0, t) - branch_fraction(0.25 - h, 1.0, t)) / (2.0 * h)
                             * enhancement_factor(make(0.25));
        for (double sign : {-1.0, 1.0}) {
            const double dg = sign * 1e-6 * 0.25;
            const double E = stored_energy(make(0.25 + dg), t);
            CHECK((E - E0) == doctest::Approx(slope * dg).epsilon(1e-4));
        }
    }
}

TEST_CASE("optimal point is continuous across the near-EP band edge") {
    for (double sign : {-1.0, 1.0}) {
        const double inside = 0.25 * (1.0 + sign * 0.99e-4 * 4.0);
        const double outside = 0.25 * (1.0 + sign * 1.01e-4 * 4.0);
        CHECK(optimal_time(make(inside)) == doctest::Approx(optimal_time(make(outside))).epsilon(1e-5));
        CHECK(optimal_energy(make(inside)).E_max == doctest::Approx(optimal_energy(make(outside)).E_max).epsilon(1e-5));
        CHECK(optimal_time(make(outside)) == doctest::Approx(golden_max(outside, 1.0)).epsilon(1e-6));
        CHECK(optimal_time(make(inside)) == doctest::Approx(golden_max(inside, 1.0)).epsilon(1e-6));
    }
}

TEST_CASE("ergotropy records") {
    const EnergyRecord zero = ergotropy(make(2.0, 1.0, 0.0), 0.7);
    CHECK(zero.E == 0.0);
    CHECK(zero.ergotropy == 0.0);
    CHECK(zero.D == 1.0);

    const BatteryParams strong = make(2.0, 1.0, 5.0);
    const EnergyRecord r = ergotropy(strong, optimal_time(strong));
    CHECK(r.ergotropy / r.E > 0.99);

    const BatteryParams weak = make(2.0, 1.0, 0.01);
    const double C = enhancement_factor(weak);
    for (double t : testing::linspace(0.05, 3.0, 60)) {
        const EnergyRecord w = ergotropy(weak, t);
        CHECK(w.ergotropy == doctest::Approx(C * w.P * w.P).epsilon(1e-2));
    }
    CHECK(std::string(drive_strength_label(0.01)) == "weak");
    CHECK(std::string(drive_strength_label(5.0)) == "strong");
    CHECK(std::string(drive_strength_label(1.0)) == "intermediate");
}

TEST_CASE("property: ergotropy record invariants and limit sandwich") {
    testing::Sampler rng(24);
    for (int k = 0; k < 300; ++k) {
        const BatteryParams p = rng.params();
        const double C = enhancement_factor(p);
        const double t = rng.uniform(0.0, 10.0) / std::max(p.gamma, p.g);
        const EnergyRecord r = ergotropy(p, t);
        CHECK(r.E >= 0.0);
        CHECK(r.E_beta >= 0.0);
        CHECK(r.D >= 1.0);
        CHECK(r.ergotropy >= 0.0);
        CHECK(r.ergotropy <= r.E * (1.0 + 1e-14));
        CHECK(r.ergotropy == doctest::Approx(r.E - r.E_beta).epsilon(1e-12).scale(p.omega_b * C));
        CHECK(r.E_beta == doctest::Approx(p.omega_b * (std::sqrt(r.D) - 1.0) / 2.0).epsilon(1e-10).scale(p.omega_b));
        CHECK(r.E <= p.omega_b * C * (1.0 + 1e-14));
        const double lo = p.omega_b * C * r.P * r.P, hi = p.omega_b * C * r.P;
        CHECK(r.ergotropy >= lo * (1.0 - 1e-12));
        CHECK(r.ergotropy <= hi * (1.0 + 1e-12));
        CHECK(r.P == doctest::Approx(population_holder(p, t) / (C > 0 ? C : 1.0)).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("property: normalized traces collapse onto g/gamma and gamma t") {
    testing::Sampler rng(25);
    for (int k = 0; k < 100; ++k) {
        const BatteryParams p = rng.params();
        const double lambda = rng.log_uniform(0.1, 10.0);
        BatteryParams q = p;
        q.g *= lambda;
        q.gamma *= lambda;
        q.omega_b = rng.log_uniform(0.1, 10.0);
        q.Omega = rng.uniform(0.1, 2.5);
        for (double gt : {0.1, 0.7, 2.0, 6.0}) {
            const double t = gt / p.gamma;
            const double a = stored_energy(p, t) / (p.omega_b * enhancement_factor(p) + 1e-300);
            const double b = stored_energy(q, t / lambda) / (q.omega_b * enhancement_factor(q));
            if (p.Omega > 0.0) CHECK(a == doctest::Approx(b).epsilon(1e-11).scale(1e-300));
        }
    }
}

TEST_CASE("property: optimal time decreases and optimal energy increases with coupling") {
    double last_t = INFINITY, last_E = 0.0;
    for (double x : testing::linspace(std::log(0.01), std::log(100.0), 400)) {
        const OptimalPoint op = optimal_energy(make(std::exp(x)));
        CHECK(op.t_E < last_t);
        CHECK(op.E_max > last_E);
        last_t = op.t_E;
        last_E = op.E_max;
    }
}

TEST_CASE("analytic energetics agree with the propagated moments") {
    testing::Sampler rng(26);
    for (int k = 0; k < 40; ++k) {
        BatteryParams p = rng.params();
        p.Omega = rng.uniform(0.1, 2.0);
        const auto grid = testing::linspace(0.0, 5.0 / p.gamma, 26);
        const auto traj = propagate_moments(post_pulse_moments(p.Omega), p, grid);
        const double C = enhancement_factor(p);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const EnergyRecord a = ergotropy(p, grid[i]);
            const EnergyRecord m = gaussian_ergotropy_from_moments(traj[i], p.omega_b, grid[i], C);
            CHECK(m.E == doctest::Approx(a.E).epsilon(1e-8).scale(1e-9 * p.omega_b * C));
            CHECK(m.D == doctest::Approx(a.D).epsilon(1e-8));
            CHECK(m.ergotropy == doctest::Approx(a.ergotropy).epsilon(1e-7).scale(1e-9 * p.omega_b * C));
            CHECK(traj[i].n_a == doctest::Approx(population_charger(p, grid[i])).epsilon(1e-8).scale(1e-9 * C));
        }
    }
}
