#include "hyperbat/fock.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hyperbat/errors.hpp"
#include "hyperbat/ode.hpp"

namespace hyperbat::fock {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

std::vector<double> sqrt_table(int n) {
    std::vector<double> s(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) s[static_cast<std::size_t>(k)] = std::sqrt(double(k));
    return s;
}

// Mode-a amplitudes of the squeezed vacuum on levels 0..n_max. The generator
// only links levels of equal parity, so it is diagonalised on the even levels
// and odd amplitudes are exactly zero.
Eigen::VectorXcd squeezed_amplitudes(double Omega, int n_max) {
    const Eigen::MatrixXd a = build_mode_operators(n_max);
    const Eigen::MatrixXd a2 = a * a;
    const Eigen::MatrixXd full = 0.5 * (a2 + a2.transpose());
    const int n_even = n_max / 2 + 1;
    Eigen::MatrixXd generator(n_even, n_even);
    for (int r = 0; r < n_even; ++r)
        for (int c = 0; c < n_even; ++c) generator(r, c) = full(2 * r, 2 * c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(generator);
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXcd phase(V.cols());
    for (Eigen::Index k = 0; k < V.cols(); ++k) phase[k] = std::exp(-I * Omega * es.eigenvalues()[k]) * V(0, k);
    const Eigen::VectorXcd even = V.cast<cd>() * phase;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_max + 1);
    for (int r = 0; r < n_even; ++r) psi[2 * r] = even[r];
    return psi;
}

double top_weight(const Eigen::VectorXcd& psi) {
    const Eigen::Index n = psi.size();
    return std::norm(psi[n - 1]) + (n > 1 ? std::norm(psi[n - 2]) : 0.0);
}

// Raw accessor over a flattened block vector, hermitian completion included.
struct BlockView {
    const BlockLayout& layout;
    const cd* data;

    cd operator()(int N, int M, int i, int j) const {
        if (N < 0 || M < 0 || N > layout.n_max() || M > layout.n_max()) return {};
        if (N >= M) {
            if (N - M > layout.max_offset()) return {};
            return data[layout.start(N, M) + static_cast<std::size_t>(i * (M + 1) + j)];
        }
        if (M - N > layout.max_offset()) return {};
        return std::conj(data[layout.start(M, N) + static_cast<std::size_t>(j * (N + 1) + i)]);
    }
};

// Interaction-picture Lindbladian for an interval starting at absolute time t0.
class InteractionLindbladian {
public:
    // offset_stride 2: only even block offsets are populated (a drive acting on
    // vacuum creates photons in pairs and no term links even to odd offsets)
    InteractionLindbladian(const BatteryParams& p, const BlockLayout& layout, const PulseSpec* pulse, double t0,
                           int offset_stride = 1)
        : p_(p), layout_(layout), pulse_(pulse), t0_(t0), stride_(offset_stride), sq_(sqrt_table(2 * layout.n_max() + 4)) {}

    void operator()(double tau, const ode::State& y, ode::State& dy) const {
        const int K = layout_.n_max();
        const cd e2 = std::exp(-2.0 * I * p_.g * tau); // e^{-2 i g tau}
        const cd e2c = std::conj(e2);
        const double hg = 0.5 * p_.gamma;
        const cd* yd = y.data();
        cd* out = dy.data();
        for (int d = 0; d <= layout_.max_offset(); ++d) {
            if (d % stride_) {
                for (int N = d; N <= K; ++N)
                    std::fill_n(out + layout_.start(N, N - d), static_cast<std::size_t>((N + 1) * (N - d + 1)), cd{});
                continue;
            }
            for (int N = d; N <= K; ++N) {
                const int M = N - d;
                const cd* R = yd + layout_.start(N, M);
                const cd* X = (N + 1 <= K) ? yd + layout_.start(N + 1, M + 1) : nullptr;
                cd* O = out + layout_.start(N, M);
                const int cols = M + 1;
                const int xcols = M + 2;
                for (int i = 0; i <= N; ++i) {
                    const double up_i = sq_[i + 1] * sq_[N - i];     // <i|c+^dag c-|i+1>
                    const double dn_i = sq_[i] * sq_[N - i + 1];     // <i|c-^dag c+|i-1>
                    for (int j = 0; j <= M; ++j) {
                        const cd r = R[i * cols + j];
                        cd na_left = double(N) * r;
                        if (i < N) na_left += e2c * up_i * R[(i + 1) * cols + j];
                        if (i > 0) na_left += e2 * dn_i * R[(i - 1) * cols + j];
                        cd na_right = double(M) * r;
                        if (j > 0) na_right += e2c * (sq_[j] * sq_[M - j + 1]) * R[i * cols + j - 1];
                        if (j < M) na_right += e2 * (sq_[j + 1] * sq_[M - j]) * R[i * cols + j + 1];
                        cd v = -0.5 * hg * (na_left + na_right);
                        if (X) {
                            const cd* xr = X + i * xcols;
                            const cd* xr1 = xr + xcols;
                            const cd jump = sq_[N + 1 - i] * (sq_[M + 1 - j] * xr[j] + e2 * sq_[j + 1] * xr[j + 1])
                                            + sq_[i + 1] * (e2c * sq_[M + 1 - j] * xr1[j] + sq_[j + 1] * xr1[j + 1]);
                            v += hg * jump;
                        }
                        O[i * cols + j] = v;
                    }
                }
            }
        }
        if (pulse_) add_drive(tau, y, dy);
    }

private:
    // <i| a_I^2 |k> between shells N+2 -> N, including the e^{-2 i omega tau} frame phase.
    cd lowering(int N, int i, int k, cd e2, cd frame) const {
        switch (k - i) {
        case 0: return 0.5 * frame * e2 * sq_[N + 2 - i] * sq_[N + 1 - i];
        case 1: return frame * sq_[i + 1] * sq_[N + 1 - i];
        case 2: return 0.5 * frame * std::conj(e2) * sq_[i + 2] * sq_[i + 1];
        default: return {};
        }
    }

    void add_drive(double tau, const ode::State& y, ode::State& dy) const {
        const double f = pulse_->envelope(t0_ + tau);
        if (f == 0.0) return;
        const cd coef = -I * 0.5 * p_.Omega * f;
        const cd e2 = std::exp(-2.0 * I * p_.g * tau);
        const cd frame = std::exp(-2.0 * I * p_.omega_b * tau);
        const int K = layout_.n_max();
        const BlockView rho{layout_, y.data()};
        for (int d = 0; d <= layout_.max_offset(); d += stride_) {
            for (int N = d; N <= K; ++N) {
                const int M = N - d;
                cd* O = dy.data() + layout_.start(N, M);
                for (int i = 0; i <= N; ++i) {
                    for (int j = 0; j <= M; ++j) {
                        cd acc{};
                        for (int s = 0; s <= 2; ++s) {
                            // L_N rho_{N+2,M}
                            if (N + 2 <= K) acc += lowering(N, i, i + s, e2, frame) * rho(N + 2, M, i + s, j);
                            // L_{N-2}^dag rho_{N-2,M}
                            if (N >= 2 && i - s >= 0 && i - s <= N - 2)
                                acc += std::conj(lowering(N - 2, i - s, i, e2, frame)) * rho(N - 2, M, i - s, j);
                            // - rho_{N,M-2} L_{M-2}
                            if (M >= 2 && j - s >= 0 && j - s <= M - 2)
                                acc -= rho(N, M - 2, i, j - s) * lowering(M - 2, j - s, j, e2, frame);
                            // - rho_{N,M+2} L_M^dag
                            if (M + 2 <= K) acc -= rho(N, M + 2, i, j + s) * std::conj(lowering(M, j, j + s, e2, frame));
                        }
                        O[i * (M + 1) + j] += coef * acc;
                    }
                }
            }
        }
    }

    BatteryParams p_;
    const BlockLayout& layout_;
    const PulseSpec* pulse_;
    double t0_;
    int stride_;
    std::vector<double> sq_;
};

double trace_of(const BlockLayout& layout, const cd* data) {
    double tr = 0.0;
    for (int N = 0; N <= layout.n_max(); ++N) {
        const cd* B = data + layout.start(N, N);
        for (int i = 0; i <= N; ++i) tr += B[i * (N + 1) + i].real();
    }
    return tr;
}

// Lab-frame phase e^{-i (E_i - E_j) dt} with E = omega N + g (N - 2 m).
void rotate_to_lab(TruncatedState& s, const BatteryParams& p, double dt) {
    const BlockLayout& L = s.layout;
    for (int d = 0; d <= L.max_offset(); ++d) {
        for (int N = d; N <= L.n_max(); ++N) {
            const int M = N - d;
            cd* B = s.rho.data() + L.start(N, M);
            for (int i = 0; i <= N; ++i)
                for (int j = 0; j <= M; ++j) {
                    const double dE = (p.omega_b + p.g) * d - 2.0 * p.g * (i - j);
                    B[i * (M + 1) + j] *= std::exp(-I * dE * dt);
                }
        }
    }
}

void evolve(TruncatedState& s, const BatteryParams& p, const PulseSpec* pulse, double t_final,
            ode::DormandPrince& stepper, const OracleOptions& opts, int offset_stride = 1) {
    if (t_final < s.t) throw Error(ErrorKind::InvalidTime, "t_final precedes the state time");
    const double dt = t_final - s.t;
    if (dt == 0.0) return;
    const InteractionLindbladian rhs(p, s.layout, pulse, s.t, offset_stride);
    const BlockLayout& layout = s.layout;
    auto guard = [&](const ode::State& y0, const ode::State& y1) {
        return std::abs(trace_of(layout, y1.data()) - trace_of(layout, y0.data())) <= opts.trace_drift;
    };
    stepper.integrate(std::cref(rhs), 0.0, dt, s.rho, guard);
    rotate_to_lab(s, p, dt);
    s.t = t_final;
    const double tr = s.trace();
    if (std::abs(tr - 1.0) > 1e-8)
        throw Error(ErrorKind::IntegrationFailure, "trace drifted to " + std::to_string(tr));
}


// exp of the one-body operator sum_jk X(j, k) c_j^dag c_k on every shell N <= K.
// It maps c_k^dag to sum_j exp(X)(j, k) c_j^dag. Index i = n1, n0 = N - i.
std::vector<Eigen::MatrixXcd> shell_exponentials(const Eigen::Matrix2cd& X, int K, const std::vector<double>& sq) {
    std::vector<Eigen::MatrixXcd> S(static_cast<std::size_t>(K) + 1);
    for (int N = 0; N <= K; ++N) {
        Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N + 1, N + 1);
        for (int i = 0; i <= N; ++i) {
            G(i, i) = X(0, 0) * double(N - i) + X(1, 1) * double(i);
            if (i >= 1) G(i - 1, i) = X(0, 1) * sq[i] * sq[N - i + 1];
            if (i < N) G(i + 1, i) = X(1, 0) * sq[N - i] * sq[i + 1];
        }
        S[static_cast<std::size_t>(N)] = G.exp();
    }
    return S;
}

// Exact propagator of the undriven truncated Lindbladian over one step h.
// With K = H - i gamma/2 a^dag a and U = exp(-i K h), rho(h) = U rho_I(h) U^dag where
// rho_I' = gamma A(t) rho_I A(t)^dag, A(t) = U(t)^-1 a U(t). All A(t) are
// lowering operators, so these superoperators commute and rho_I(h) =
// exp(gamma sum G_mn c_m . c_n^dag) rho(0), G = int alpha alpha^dag. Diagonalising G
// leaves two independent single-mode loss channels.
class FreeChannel {
public:
    FreeChannel(const BatteryParams& p, int K, double h) : K_(K), omega_(p.omega_b), h_(h), sq_(sqrt_table(2 * K + 4)) {
        const double g = p.g, q = 0.25 * p.gamma;
        Eigen::Matrix2cd K1;
        K1 << g - I * q, -I * q, -I * q, -g - I * q;

        // v' = B^T v with v(0) = (1, 1)/sqrt2 gives the coefficients of A(t); G = int v v^dag
        const Eigen::Matrix2cd Bt = (-I * K1).transpose();
        ode::Options o;
        o.rtol = 1e-13;
        o.atol = 1e-16;
        ode::DormandPrince dp(o);
        ode::State y = ode::State::Zero(6);
        y[0] = y[1] = 1.0 / std::numbers::sqrt2;
        dp.integrate(
            [&](double, const ode::State& x, ode::State& dx) {
                dx[0] = Bt(0, 0) * x[0] + Bt(0, 1) * x[1];
                dx[1] = Bt(1, 0) * x[0] + Bt(1, 1) * x[1];
                dx[2] = x[0] * std::conj(x[0]);
                dx[3] = x[0] * std::conj(x[1]);
                dx[4] = x[1] * std::conj(x[0]);
                dx[5] = x[1] * std::conj(x[1]);
            },
            0.0, h, y, nullptr);
        Eigen::Matrix2cd G;
        G << y[2], y[3], y[4], y[5];
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (G + G.adjoint()));
        const Eigen::Matrix2cd V = es.eigenvectors();
        const Eigen::Matrix2cd t = V.conjugate(); // d_k^dag = sum_j t(j, k) c_j^dag
        mu_[0] = p.gamma * std::max(0.0, es.eigenvalues()[0]);
        mu_[1] = p.gamma * std::max(0.0, es.eigenvalues()[1]);
        to_loss_ = shell_exponentials(t.log(), K, sq_);
        const auto U = shell_exponentials(-I * h * K1, K, sq_);
        from_loss_.resize(to_loss_.size());
        for (std::size_t N = 0; N < U.size(); ++N) {
            from_loss_[N] = U[N] * to_loss_[N];
            to_loss_[N].adjointInPlace();
        }
        for (int k = 0; k < 2; ++k) coef_[k] = loss_coefficients(mu_[k]);
    }

    double step() const { return h_; }

    void apply(TruncatedState& s) const {
        const BlockLayout& L = s.layout;
        using RowBlock = Eigen::Map<Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
        auto blk = [&](int N, int M) { return RowBlock(s.rho.data() + L.start(N, M), N + 1, M + 1); };
        Eigen::MatrixXcd tmp;
        for (int d = 0; d <= L.max_offset(); ++d) {
            // the channel is linear and keeps offsets apart, so an all-zero offset stays zero
            const std::size_t begin = L.start(d, 0);
            const std::size_t end = d < L.max_offset() ? L.start(d + 1, 0) : L.size();
            if (std::all_of(s.rho.data() + begin, s.rho.data() + end, [](const cd& z) { return z == cd{}; })) continue;

            for (int N = d; N <= K_; ++N) {
                auto B = blk(N, N - d);
                tmp.noalias() = to_loss_[N] * B;
                B.noalias() = tmp * to_loss_[N - d].adjoint();
            }
            // mode 0 loss keeps n1 (the index); mode 1 loss shifts it by k
            for (int mode = 0; mode < 2; ++mode) {
                if (mu_[mode] == 0.0) continue;
                for (int N = d; N < K_; ++N) {
                    const int M = N - d;
                    double* Y = reinterpret_cast<double*>(s.rho.data() + L.start(N, M));
                    for (int k = 1; N + k <= K_; ++k) {
                        const double* ck = coef_[mode].data() + static_cast<std::ptrdiff_t>(k) * (K_ + 1);
                        const double* X = reinterpret_cast<const double*>(s.rho.data() + L.start(N + k, M + k));
                        const int xcols = M + k + 1;
                        for (int i = 0; i <= N; ++i) {
                            double* __restrict y = Y + 2 * i * (M + 1);
                            if (mode == 0) {
                                const double ai = ck[N - i];
                                const double* __restrict x = X + 2 * i * xcols;
                                for (int j = 0; j <= M; ++j) {
                                    const double w = ai * ck[M - j];
                                    y[2 * j] += w * x[2 * j];
                                    y[2 * j + 1] += w * x[2 * j + 1];
                                }
                            } else {
                                const double ai = ck[i];
                                const double* __restrict x = X + 2 * ((i + k) * xcols + k);
                                for (int j = 0; j <= M; ++j) {
                                    const double w = ai * ck[j];
                                    y[2 * j] += w * x[2 * j];
                                    y[2 * j + 1] += w * x[2 * j + 1];
                                }
                            }
                        }
                    }
                }
            }
            const cd phase = std::exp(-I * omega_ * double(d) * h_);
            for (int N = d; N <= K_; ++N) {
                auto B = blk(N, N - d);
                tmp.noalias() = from_loss_[N] * B;
                B.noalias() = phase * (tmp * from_loss_[N - d].adjoint());
            }
        }
        s.t += h_;
    }

private:
    // c(n, k) = sqrt(mu^k binom(n + k, k))
    Eigen::MatrixXd loss_coefficients(double mu) const {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(K_ + 1, K_ + 1);
        for (int n = 0; n <= K_; ++n) {
            c(n, 0) = 1.0;
            for (int k = 1; n + k <= K_; ++k) c(n, k) = c(n, k - 1) * std::sqrt(mu * (n + k) / k);
        }
        return c;
    }

    int K_;
    double omega_;
    double h_;
    std::vector<double> sq_;
    std::vector<Eigen::MatrixXcd> to_loss_;
    std::vector<Eigen::MatrixXcd> from_loss_;
    double mu_[2]{};
    Eigen::MatrixXd coef_[2];
};

ode::Options stepper_options(const OracleOptions& opts) {
    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    return o;
}


class ChannelCache {
public:
    ChannelCache(const BatteryParams& p, int K) : p_(p), K_(K) {}

    // Uniform grids give steps that differ only by rounding; those share a channel.
    const FreeChannel& get(double h) {
        for (const auto& c : channels_)
            if (std::abs(c->step() - h) <= 1e-13 * h) return *c;
        channels_.push_back(std::make_unique<FreeChannel>(p_, K_, h));
        return *channels_.back();
    }

private:
    BatteryParams p_;
    int K_;
    std::vector<std::unique_ptr<FreeChannel>> channels_;
};

// Undriven evolution to t_final with the selected propagator.
class FreeEvolution {
public:
    FreeEvolution(const BatteryParams& p, int K, const OracleOptions& opts)
        : p_(p), opts_(opts), cache_(p, K), stepper_(stepper_options(opts)) {}

    void operator()(TruncatedState& s, double t_final) {
        if (t_final < s.t) throw Error(ErrorKind::InvalidTime, "t_final precedes the state time");
        if (opts_.propagator == Propagator::RungeKutta) {
            evolve(s, p_, nullptr, t_final, stepper_, opts_);
            return;
        }
        const double dt = t_final - s.t;
        if (dt == 0.0) return;
        // keep gamma h <= 1/2 so the loss series stays well scaled
        const int n = std::max(1, static_cast<int>(std::ceil(2.0 * p_.gamma * dt)));
        const FreeChannel& ch = cache_.get(dt / n);
        for (int k = 0; k < n; ++k) ch.apply(s);
        s.t = t_final;
        const double tr = s.trace();
        if (std::abs(tr - 1.0) > 1e-8)
            throw Error(ErrorKind::IntegrationFailure, "trace drifted to " + std::to_string(tr));
    }

private:
    BatteryParams p_;
    OracleOptions opts_;
    ChannelCache cache_;
    ode::DormandPrince stepper_;
};

TruncatedState project(const TruncatedState& s, int max_offset) {
    TruncatedState out;
    out.layout = BlockLayout(s.layout.n_max(), std::min(max_offset, s.layout.n_max()));
    out.rho.resize(static_cast<Eigen::Index>(out.layout.size()));
    out.t = s.t;
    for (int d = 0; d <= out.layout.max_offset(); ++d)
        for (int N = d; N <= out.layout.n_max(); ++N) {
            const std::size_t n = static_cast<std::size_t>((N + 1) * (N - d + 1));
            std::copy_n(s.rho.data() + s.layout.start(N, N - d), n, out.rho.data() + out.layout.start(N, N - d));
        }
    return out;
}

} // namespace

Eigen::MatrixXd build_mode_operators(int n_max) {
    if (n_max < 1) throw Error(ErrorKind::InvalidParams, "Fock cutoff must be >= 1");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

int heuristic_cutoff(double Omega) {
    const double s = std::sinh(Omega);
    const double c = std::cosh(Omega);
    return std::max(20, static_cast<int>(std::ceil(10.0 * s * s + 6.0 * s * c)));
}

int certified_cutoff(double Omega, int max_cutoff) {
    int K = heuristic_cutoff(Omega);
    while (true) {
        if (top_weight(squeezed_amplitudes(Omega, K)) <= kTruncationTarget) return K;
        if (K >= max_cutoff)
            throw Error(ErrorKind::TruncationInsufficient,
                        "no cutoff up to " + std::to_string(max_cutoff) + " resolves Omega = " + std::to_string(Omega));
        K = std::min(max_cutoff, static_cast<int>(std::ceil(1.1 * K)));
    }
}

BlockLayout::BlockLayout(int n_max, int max_offset) : n_max_(n_max), max_offset_(max_offset) {
    if (n_max < 1) throw Error(ErrorKind::InvalidParams, "Fock cutoff must be >= 1");
    if (max_offset < 0 || max_offset > n_max) throw Error(ErrorKind::InvalidParams, "block offset out of range");
    start_.assign(static_cast<std::size_t>(max_offset) + 1, std::vector<std::size_t>(static_cast<std::size_t>(n_max) + 1, 0));
    for (int d = 0; d <= max_offset; ++d)
        for (int N = d; N <= n_max; ++N) {
            start_[static_cast<std::size_t>(d)][static_cast<std::size_t>(N)] = size_;
            size_ += static_cast<std::size_t>((N + 1) * (N - d + 1));
        }
}

std::complex<double> TruncatedState::element(int N, int M, int i, int j) const {
    return BlockView{layout, rho.data()}(N, M, i, j);
}

Eigen::MatrixXcd TruncatedState::block(int N, int M) const {
    Eigen::MatrixXcd B(N + 1, M + 1);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= M; ++j) B(i, j) = element(N, M, i, j);
    return B;
}

double TruncatedState::trace() const { return trace_of(layout, rho.data()); }

double TruncatedState::hermiticity_defect() const {
    double m = 0.0;
    for (int N = 0; N <= layout.n_max(); ++N) {
        const Eigen::MatrixXcd B = block(N, N);
        m = std::max(m, (B - B.adjoint()).cwiseAbs().maxCoeff());
    }
    return m;
}

double TruncatedState::min_block_eigenvalue() const {
    double m = std::numeric_limits<double>::infinity();
    for (int N = 0; N <= layout.n_max(); ++N) {
        const Eigen::MatrixXcd B = block(N, N);
        const Eigen::MatrixXcd H = 0.5 * (B + B.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
}

double TruncatedState::truncation_weight() const {
    double w = 0.0;
    for (int N = std::max(0, layout.n_max() - 1); N <= layout.n_max(); ++N) {
        const cd* B = rho.data() + layout.start(N, N);
        for (int i = 0; i <= N; ++i) w += B[i * (N + 1) + i].real();
    }
    return w;
}

TruncatedState TruncatedState::vacuum(int n_max, int max_offset) {
    TruncatedState s;
    s.layout = BlockLayout(n_max, max_offset);
    s.rho = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.layout.size()));
    s.rho[0] = 1.0;
    return s;
}

TruncatedState squeeze_vacuum(double Omega, int n_max, int max_offset, bool certify) {
    if (!std::isfinite(Omega) || Omega < 0.0) throw Error(ErrorKind::InvalidParams, "Omega must be >= 0");
    const Eigen::VectorXcd psi = squeezed_amplitudes(Omega, n_max);
    if (certify && top_weight(psi) > kTruncationLimit)
        throw Error(ErrorKind::TruncationInsufficient,
                    "top Fock levels hold " + std::to_string(top_weight(psi)) + " at n_max = " + std::to_string(n_max));

    // |n>_a |0>_b = sum_m sqrt(binom(n, m) / 2^n) |n - m, m> in the normal-mode basis
    std::vector<Eigen::VectorXcd> shell(static_cast<std::size_t>(n_max) + 1);
    for (int N = 0; N <= n_max; ++N) {
        Eigen::VectorXcd v(N + 1);
        for (int m = 0; m <= N; ++m) {
            const double log_w = 0.5 * (std::lgamma(N + 1.0) - std::lgamma(m + 1.0) - std::lgamma(N - m + 1.0)
                                        - N * std::numbers::ln2);
            v[m] = psi[N] * std::exp(log_w);
        }
        shell[static_cast<std::size_t>(N)] = std::move(v);
    }
    TruncatedState s;
    s.layout = BlockLayout(n_max, max_offset);
    s.rho.resize(static_cast<Eigen::Index>(s.layout.size()));
    for (int d = 0; d <= max_offset; ++d)
        for (int N = d; N <= n_max; ++N) {
            const int M = N - d;
            const auto& vN = shell[static_cast<std::size_t>(N)];
            const auto& vM = shell[static_cast<std::size_t>(M)];
            cd* B = s.rho.data() + s.layout.start(N, M);
            for (int i = 0; i <= N; ++i)
                for (int j = 0; j <= M; ++j) B[i * (M + 1) + j] = vN[i] * std::conj(vM[j]);
        }
    return s;
}

void integrate(TruncatedState& state, const BatteryParams& p, double t_final, const OracleOptions& opts) {
    validate(p);
    FreeEvolution(p, state.layout.n_max(), opts)(state, t_final);
}

OracleReport extract_report(const TruncatedState& s, const BatteryParams& p) {
    const BlockLayout& L = s.layout;
    const int K = L.n_max();
    const std::vector<double> sq = sqrt_table(2 * K + 4);
    double n_plus = 0.0, n_minus = 0.0;
    cd x{};               // <c+^dag c->
    cd pp{}, mm{}, pm{};  // <c+ c+>, <c- c->, <c+ c->
    cd c_plus{}, c_minus{};
    for (int N = 0; N <= K; ++N) {
        for (int i = 0; i <= N; ++i) {
            const double pop = s.element(N, N, i, i).real();
            n_plus += (N - i) * pop;
            n_minus += i * pop;
            if (i >= 1) x += sq[i] * sq[N - i + 1] * s.element(N, N, i, i - 1);
        }
        if (L.stored(N + 1, N)) {
            for (int m = 0; m <= N; ++m) c_plus += sq[N + 1 - m] * s.element(N + 1, N, m, m);
            for (int k = 1; k <= N + 1; ++k) c_minus += sq[k] * s.element(N + 1, N, k, k - 1);
        }
        if (L.stored(N + 2, N)) {
            for (int m = 0; m <= N; ++m) pp += sq[N + 2 - m] * sq[N + 1 - m] * s.element(N + 2, N, m, m);
            for (int k = 2; k <= N + 2; ++k) mm += sq[k] * sq[k - 1] * s.element(N + 2, N, k, k - 2);
            for (int k = 1; k <= N + 1; ++k) pm += sq[k] * sq[N + 2 - k] * s.element(N + 2, N, k, k - 1);
        }
    }
    OracleReport r;
    r.t = s.t;
    r.n_max = K;
    r.moments.n_a = 0.5 * (n_plus + n_minus) + x.real();
    r.moments.n_b = 0.5 * (n_plus + n_minus) - x.real();
    // <a^dag b> = (n+ - n- - x + conj(x)) / 2
    r.moments.coh_ab = 0.5 * (n_plus - n_minus) - I * x.imag();
    r.moments.sq_aa = 0.5 * (pp + 2.0 * pm + mm);
    r.moments.sq_bb = 0.5 * (pp - 2.0 * pm + mm);
    r.moments.sq_ab = 0.5 * (pp - mm);
    r.mean_a = (c_plus + c_minus) / std::numbers::sqrt2;
    r.mean_b = (c_plus - c_minus) / std::numbers::sqrt2;
    const double C = std::sinh(p.Omega) * std::sinh(p.Omega);
    r.energy = gaussian_ergotropy_from_moments(r.moments, p.omega_b, s.t, C);
    r.truncation_weight = s.truncation_weight();
    r.trace = s.trace();
    r.hermiticity_defect = s.hermiticity_defect();
    return r;
}

std::vector<OracleReport> run_oracle(const BatteryParams& p, const std::vector<double>& t_grid,
                                     const OracleOptions& opts) {
    validate(p);
    const int K = opts.n_max > 0 ? opts.n_max : certified_cutoff(p.Omega);
    TruncatedState s = squeeze_vacuum(p.Omega, K, std::min(opts.max_offset, K), opts.certify);
    FreeEvolution evolve_to(p, K, opts);
    std::vector<OracleReport> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        evolve_to(s, t);
        out.push_back(extract_report(s, p));
    }
    return out;
}

PulseRun finite_width_pulse_run(const BatteryParams& p, const PulseSpec& pulse, const std::vector<double>& t_grid,
                                const OracleOptions& opts) {
    validate(p);
    validate(pulse);
    if (pulse.kind != PulseKind::FiniteWidth) throw Error(ErrorKind::InvalidParams, "finite_width_pulse_run needs a finite pulse");
    const int K = opts.n_max > 0 ? opts.n_max : certified_cutoff(p.Omega);
    TruncatedState s = TruncatedState::vacuum(K, K);
    ode::DormandPrince pulse_stepper(stepper_options(opts));
    evolve(s, p, &pulse, pulse.end_time(), pulse_stepper, opts, 2);
    PulseRun run;
    run.post_pulse = extract_report(s, p);
    if (opts.certify && !run.post_pulse.certified())
        throw Error(ErrorKind::TruncationInsufficient, "driven state reaches the Fock cutoff");

    TruncatedState free = project(s, opts.max_offset);
    FreeEvolution evolve_to(p, K, opts);
    for (double t : t_grid) {
        evolve_to(free, t);
        run.reports.push_back(extract_report(free, p));
    }
    return run;
}

} // namespace hyperbat::fock
