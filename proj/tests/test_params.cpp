#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "hyperbat/errors.hpp"
#include "hyperbat/moments.hpp"
#include "hyperbat/params.hpp"
#include "support.hpp"

using namespace hyperbat;

TEST_CASE("regime of the default coupling g = 2 gamma") {
    const BatteryParams p{1.0, 2.0, 1.0, 1.0};
    const RegimeRates r = classify_regime(p);
    CHECK(r.regime == Regime::Underdamped);
    CHECK(r.rate == doctest::Approx(std::sqrt(4.0 - 1.0 / 16.0)).epsilon(1e-14));
    CHECK(r.rate == doctest::Approx(1.98431).epsilon(1e-5));
    CHECK(r.g_ep == 0.25);

    // the same rate from the spectrum: populations oscillate at 2G
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(build_population_matrix(p));
    double top = 0.0;
    for (int k = 0; k < 4; ++k) top = std::max(top, es.eigenvalues()[k].real());
    CHECK(top == doctest::Approx(2.0 * r.rate).epsilon(1e-10));
}

TEST_CASE("exceptional point and decoupled limit") {
    const RegimeRates ep = classify_regime({1.0, 0.25, 1.0, 1.0});
    CHECK(ep.regime == Regime::ExceptionalPoint);
    CHECK(ep.rate == 0.0);

    const RegimeRates off = classify_regime({1.0, 0.0, 1.0, 1.0});
    CHECK(off.regime == Regime::Overdamped);
    CHECK(off.rate == doctest::Approx(0.25).epsilon(1e-15));

    // tolerance band is relative to gamma
    CHECK(classify_regime({1.0, 0.25 * (1.0 + 2e-9), 1.0, 1.0}).regime == Regime::ExceptionalPoint);
    CHECK(classify_regime({1.0, 0.25 * (1.0 + 1e-8), 1.0, 1.0}).regime == Regime::Underdamped);
    CHECK(classify_regime({1.0, 0.25 * (1.0 - 1e-8), 1.0, 1.0}).regime == Regime::Overdamped);
}

TEST_CASE("lossless conventions") {
    const RegimeRates r = classify_regime({1.0, 0.7, 0.0, 1.0});
    CHECK(r.regime == Regime::Underdamped);
    CHECK(r.rate == 0.7);
    const RegimeRates z = classify_regime({1.0, 0.0, 0.0, 1.0});
    CHECK(z.regime == Regime::Underdamped);
    CHECK(z.rate == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const BatteryParams& p : {BatteryParams{0.0, 1.0, 1.0, 1.0}, BatteryParams{1.0, -1.0, 1.0, 1.0},
                                   BatteryParams{1.0, 1.0, -0.1, 1.0}, BatteryParams{1.0, 1.0, 1.0, -1.0},
                                   BatteryParams{nan, 1.0, 1.0, 1.0}, BatteryParams{1.0, 1.0, 1.0, INFINITY}}) {
        try {
            classify_regime(p);
            FAIL("accepted invalid params");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidParams);
        }
    }
}

TEST_CASE("enhancement factor") {
    CHECK(enhancement_factor({1.0, 1.0, 1.0, 0.0}) == 0.0);
    CHECK(enhancement_factor({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.38109).epsilon(1e-5));
    CHECK(enhancement_factor({1.0, 1.0, 1.0, 3.0}) == doctest::Approx(100.357818).epsilon(1e-8));
}

TEST_CASE("property: enhancement factor is increasing and vanishes only at zero") {
    testing::Sampler rng(11);
    for (int k = 0; k < 500; ++k) {
        const double a = rng.uniform(0.0, 4.0), b = rng.uniform(0.0, 4.0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        if (lo == hi) continue;
        CHECK(enhancement_factor({1.0, 1.0, 1.0, lo}) < enhancement_factor({1.0, 1.0, 1.0, hi}));
        CHECK(enhancement_factor({1.0, 1.0, 1.0, hi}) > 0.0);
    }
}

TEST_CASE("property: classification is scale invariant") {
    testing::Sampler rng(12);
    for (int k = 0; k < 500; ++k) {
        const BatteryParams p = rng.params();
        const double lambda = rng.log_uniform(1e-3, 1e3);
        BatteryParams q = p;
        q.g *= lambda;
        q.gamma *= lambda;
        const RegimeRates a = classify_regime(p), b = classify_regime(q);
        CHECK(a.regime == b.regime);
        CHECK(b.rate == doctest::Approx(lambda * a.rate).epsilon(1e-12));
        const double r2 = a.regime == Regime::Underdamped ? p.g * p.g - p.gamma * p.gamma / 16 : p.gamma * p.gamma / 16 - p.g * p.g;
        CHECK(a.rate * a.rate == doctest::Approx(r2).epsilon(1e-10).scale(p.gamma * p.gamma));
    }
}

TEST_CASE("property: rate is continuous through the exceptional point") {
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        for (double sign : {-1.0, 1.0}) {
            const RegimeRates r = classify_regime({1.0, 0.25 * (1.0 + sign * eps), 1.0, 1.0});
            // rate = sqrt(|g^2 - 1/16|) ~ 0.25 sqrt(2 eps)
            CHECK(r.rate == doctest::Approx(0.25 * std::sqrt(eps * (2.0 + sign * eps))).epsilon(1e-6));
        }
    }
}

TEST_CASE("strings round-trip") {
    for (Regime r : {Regime::Underdamped, Regime::ExceptionalPoint, Regime::Overdamped})
        CHECK(regime_from_string(to_string(r)) == r);
    CHECK_FALSE(regime_from_string("critical").has_value());
    for (PulseKind k : {PulseKind::Delta, PulseKind::FiniteWidth}) CHECK(pulse_kind_from_string(to_string(k)) == k);
    for (PulseShape s : {PulseShape::Gaussian, PulseShape::Rectangular}) CHECK(pulse_shape_from_string(to_string(s)) == s);
}

TEST_CASE("pulse envelopes have unit area") {
    for (PulseShape shape : {PulseShape::Gaussian, PulseShape::Rectangular}) {
        const PulseSpec pulse = PulseSpec::finite(0.02, shape);
        const int n = 200000;
        const double h = pulse.end_time() / n;
        double area = 0.0;
        for (int k = 0; k < n; ++k) area += pulse.envelope((k + 0.5) * h) * h;
        CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(pulse.envelope(-1e-3) == 0.0);
        CHECK(pulse.envelope(pulse.end_time() + 1e-3) == 0.0);
    }
    const PulseSpec g = PulseSpec::finite(0.02, PulseShape::Gaussian);
    // full width at half maximum equals tau
    CHECK(g.envelope(3 * 0.02 + 0.01) == doctest::Approx(0.5 * g.envelope(3 * 0.02)).epsilon(1e-12));
}

TEST_CASE("pulse validation and width flag") {
    CHECK_NOTHROW(validate(PulseSpec::delta()));
    CHECK_THROWS_AS(validate(PulseSpec::finite(0.0, PulseShape::Gaussian)), Error);
    CHECK_THROWS_AS(validate(PulseSpec{PulseKind::Delta, 0.1, PulseShape::Gaussian}), Error);
    CHECK(pulse_is_short(PulseSpec::finite(0.001, PulseShape::Gaussian), 20.0));
    CHECK_FALSE(pulse_is_short(PulseSpec::finite(0.01, PulseShape::Gaussian), 20.0));
    CHECK(pulse_is_short(PulseSpec::delta(), 20.0));
}
