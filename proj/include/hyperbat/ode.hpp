// ode.hpp - adaptive Dormand-Prince 5(4) stepper over complex state vectors.
// Used for the density-matrix oracle and the finite-pulse moment system.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "hyperbat/errors.hpp"

namespace hyperbat::ode {

using State = Eigen::VectorXcd;
using Rhs = std::function<void(double t, const State& y, State& dy)>;
/// Extra acceptance test on a trial step (e.g. trace drift); false rejects.
using StepGuard = std::function<bool(const State& y_old, const State& y_new)>;

struct Options {
    double rtol{1e-8};
    double atol{1e-12};
    double h_init{0.0}; // 0: choose automatically
    double h_max{0.0};  // 0: unbounded
    std::size_t max_steps{5'000'000};
};

struct Stats {
    std::size_t accepted{0};
    std::size_t rejected{0};
    std::size_t guard_rejected{0};
    std::size_t rhs_evals{0};
};

class DormandPrince {
public:
    explicit DormandPrince(Options opts = {}) : opts_(opts) {}

    /// Advances y from t0 to t1 (t1 >= t0) in place. The last accepted
    /// step size is kept and reused by the next call.
    void integrate(const Rhs& f, double t0, double t1, State& y, const StepGuard& guard = {}) {
        if (t1 < t0) throw Error(ErrorKind::IntegrationFailure, "integration interval runs backwards");
        if (t1 == t0) return;
        const Eigen::Index n = y.size();
        if (k1_.size() != n) {
            for (State* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_}) k->resize(n);
            h_ = 0.0;
        }
        double t = t0;
        f(t, y, k1_);
        ++stats_.rhs_evals;
        if (h_ <= 0.0) h_ = opts_.h_init > 0.0 ? opts_.h_init : initial_step(f, t, y, t1 - t0);
        std::size_t steps = 0;
        while (t < t1) {
            if (++steps > opts_.max_steps)
                throw Error(ErrorKind::IntegrationFailure, "step budget exhausted at t = " + std::to_string(t));
            double h = std::min(h_, t1 - t);
            if (opts_.h_max > 0.0) h = std::min(h, opts_.h_max);
            const bool last = (t + h >= t1);
            attempt(f, t, y, h);
            const double err = error_norm(y);
            if (err <= 1.0 && (!guard || guard(y, ynew_))) {
                t = last ? t1 : t + h;
                y.swap(ynew_);
                k1_.swap(k7_); // FSAL
                ++stats_.accepted;
                const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                if (!last || h * fac > h_) h_ = h * fac;
            } else {
                if (err <= 1.0) {
                    ++stats_.guard_rejected;
                    h_ = 0.5 * h;
                } else {
                    ++stats_.rejected;
                    h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
                }
                if (h_ < 1e-15 * std::max(1.0, std::abs(t)))
                    throw Error(ErrorKind::IntegrationFailure, "step size underflow at t = " + std::to_string(t));
            }
        }
    }

    const Stats& stats() const { return stats_; }
    void reset_step() { h_ = 0.0; }

private:
    // Hairer, Norsett & Wanner, starting step heuristic
    double initial_step(const Rhs& f, double t, const State& y, double span) {
        const double d0 = scaled_norm(y, y);
        const double d1 = scaled_norm(k1_, y);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        ytmp_ = y + h0 * k1_;
        f(t + h0, ytmp_, k2_);
        ++stats_.rhs_evals;
        const double d2 = scaled_norm(k2_ - k1_, y) / h0;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    double scaled_norm(const State& v, const State& ref) const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            m = std::max(m, std::abs(v[i]) / (opts_.atol + opts_.rtol * std::abs(ref[i])));
        return m;
    }

    void attempt(const Rhs& f, double t, const State& y, double h) {
        constexpr double a21 = 1.0 / 5.0;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                         a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                         b6 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                         e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        ytmp_ = y + h * a21 * k1_;
        f(t + h / 5.0, ytmp_, k2_);
        ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
        f(t + 3.0 * h / 10.0, ytmp_, k3_);
        ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f(t + 4.0 * h / 5.0, ytmp_, k4_);
        ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f(t + 8.0 * h / 9.0, ytmp_, k5_);
        ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f(t + h, ytmp_, k6_);
        ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        f(t + h, ynew_, k7_);
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        stats_.rhs_evals += 6;
    }

    double error_norm(const State& y) const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            m = std::max(m, std::abs(err_[i]) / sc);
        }
        return m;
    }

    Options opts_;
    Stats stats_;
    double h_{0.0};
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
};

} // namespace hyperbat::ode
