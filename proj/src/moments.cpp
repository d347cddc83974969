#include "hyperbat/moments.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "hyperbat/errors.hpp"
#include "hyperbat/ode.hpp"

namespace hyperbat {

namespace {

constexpr cd I{0.0, 1.0};

void check_grid(const std::vector<double>& t_grid) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0)
            throw Error(ErrorKind::InvalidTime, "time grid must be finite and non-negative");
        if (i > 0 && t_grid[i] < t_grid[i - 1]) throw Error(ErrorKind::InvalidTime, "time grid must be ascending");
    }
}

} // namespace

Eigen::Matrix<cd, 6, 1> SecondMoments::to_vector() const {
    Eigen::Matrix<cd, 6, 1> v;
    v << n_a, n_b, coh_ab, sq_aa, sq_bb, sq_ab;
    return v;
}

SecondMoments SecondMoments::from_vector(const Eigen::Matrix<cd, 6, 1>& v) {
    return {v[0].real(), v[1].real(), v[2], v[3], v[4], v[5]};
}

SecondMoments operator*(double s, const SecondMoments& m) {
    return {s * m.n_a, s * m.n_b, s * m.coh_ab, s * m.sq_aa, s * m.sq_bb, s * m.sq_ab};
}

Eigen::Matrix4cd build_population_matrix(const BatteryParams& p) {
    validate(p);
    const double g = p.g;
    const double k = p.gamma;
    Eigen::Matrix4cd H;
    // clang-format off
    H << -I * k, 0.0,    g,            -g,
          0.0,   0.0,   -g,             g,
          g,    -g,     -I * (k / 2),   0.0,
         -g,     g,      0.0,          -I * (k / 2);
    // clang-format on
    return H;
}

Eigen::Matrix3cd derive_squeeze_block(const BatteryParams& p) {
    validate(p);
    const double w = p.omega_b;
    const double g = p.g;
    const double k = p.gamma;
    Eigen::Matrix3cd M;
    // clang-format off
    M << -(2.0 * I * w + k), 0.0,           -2.0 * I * g,
          0.0,              -2.0 * I * w,   -2.0 * I * g,
         -I * g,            -I * g,         -(2.0 * I * w + k / 2);
    // clang-format on
    return M;
}

DynamicalMatrix build_dynamical_matrix(const BatteryParams& p) {
    return {build_population_matrix(p), derive_squeeze_block(p), classify_regime(p).regime};
}

PopulationSpectrum population_spectrum(const BatteryParams& p) {
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(build_population_matrix(p));
    const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    return {es.eigenvalues(), smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity()};
}

SecondMoments post_pulse_moments(double Omega) {
    if (!std::isfinite(Omega) || Omega < 0.0) throw Error(ErrorKind::InvalidParams, "Omega must be >= 0");
    SecondMoments m;
    const double s = std::sinh(Omega);
    m.n_a = s * s;
    m.sq_aa = -I * s * std::cosh(Omega);
    return m;
}

std::vector<SecondMoments> propagate_moments(const SecondMoments& initial, const BatteryParams& p,
                                             const std::vector<double>& t_grid) {
    check_grid(t_grid);
    const DynamicalMatrix dm = build_dynamical_matrix(p);
    std::vector<SecondMoments> out;
    out.reserve(t_grid.size());
    if (t_grid.empty()) return out;

    Eigen::Vector4cd psi(initial.n_a, initial.n_b, initial.coh_ab, std::conj(initial.coh_ab));
    Eigen::Vector3cd sq(initial.sq_aa, initial.sq_bb, initial.sq_ab);
    auto emit = [&] {
        SecondMoments m;
        m.n_a = psi[0].real();
        m.n_b = psi[1].real();
        m.coh_ab = psi[2];
        m.sq_aa = sq[0];
        m.sq_bb = sq[1];
        m.sq_ab = sq[2];
        out.push_back(m);
    };

    // The initial moments are taken at t = 0 (just after the pulse).
    double t = 0.0;
    double cached_dt = -1.0;
    Eigen::Matrix4cd Up;
    Eigen::Matrix3cd Us;
    for (double target : t_grid) {
        const double dt = target - t;
        if (dt > 0.0) {
            if (dt != cached_dt) {
                Up = (-I * dt * dm.population).exp();
                Us = (dt * dm.squeeze).exp();
                cached_dt = dt;
            }
            psi = Up * psi;
            sq = Us * sq;
            t = target;
        }
        emit();
    }
    return out;
}

SecondMoments propagate_through_pulse(const BatteryParams& p, const PulseSpec& pulse, double rtol) {
    validate(p);
    validate(pulse);
    if (pulse.kind == PulseKind::Delta) return post_pulse_moments(p.Omega);

    const double w = p.omega_b, g = p.g, k = p.gamma, Om = p.Omega;
    // y = (n_a, n_b, <a^dag b>, <aa>, <bb>, <ab>)
    auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
        const double f = Om * pulse.envelope(t);
        const cd na = y[0], nb = y[1], ab_dag = y[2], aa = y[3], bb = y[4], ab = y[5];
        const cd ba_dag = std::conj(ab_dag);
        dy[0] = -k * na - I * g * ab_dag + I * g * ba_dag + I * f * (aa - std::conj(aa));
        dy[1] = I * g * ab_dag - I * g * ba_dag;
        dy[2] = -0.5 * k * ab_dag + I * g * (nb - na) + I * f * ab;
        dy[3] = -(2.0 * I * w + k) * aa - 2.0 * I * g * ab - I * f * (2.0 * na + 1.0);
        dy[4] = -2.0 * I * w * bb - 2.0 * I * g * ab;
        dy[5] = -(2.0 * I * w + 0.5 * k) * ab - I * g * (aa + bb) - I * f * ab_dag;
    };
    ode::Options opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-3;
    opts.h_max = pulse.end_time() / 50.0;
    ode::DormandPrince stepper(opts);
    ode::State y = ode::State::Zero(6);
    stepper.integrate(rhs, 0.0, pulse.end_time(), y);
    return SecondMoments::from_vector(y);
}

EnergyRecord gaussian_ergotropy_from_moments(const SecondMoments& m, double omega_b, double t, double C) {
    const double bb = std::abs(m.sq_bb);
    // D - 1 = 4 (n_b + n_b^2 - |bb|^2), grouped to limit cancellation
    double x = 4.0 * (m.n_b + (m.n_b - bb) * (m.n_b + bb));
    if (x < -1e-6) throw Error(ErrorKind::UnphysicalMoments, "passive discriminant D < 1");
    x = std::max(x, 0.0);
    EnergyRecord r;
    r.t = t;
    r.D = 1.0 + x;
    r.E = omega_b * m.n_b;
    r.E_beta = omega_b * 0.5 * x / (std::sqrt(1.0 + x) + 1.0);
    r.ergotropy = r.E - r.E_beta;
    if (r.ergotropy < 0.0) {
        if (r.ergotropy < -1e-10 * omega_b)
            throw Error(ErrorKind::UnphysicalMoments, "negative ergotropy beyond rounding");
        r.ergotropy = 0.0;
    }
    r.P = C > 0.0 ? m.n_b / C : 0.0;
    return r;
}

} // namespace hyperbat
