#include "anisoft/local_means.hpp"

#include "anisoft/errors.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace anisoft {

namespace {

constexpr int kQuadratureNodes = 2048;  // on [-1, 1]
constexpr int kMomentNodes = 4096;

double raw_bump(double x) {
    if (!(std::abs(x) < 1.0)) return 0.0;
    return std::exp(-0.5 * (1.0 / (1.0 - x) + 1.0 / (1.0 + x)));
}

double bump_mass() {
    static const double mass = [] {
        const double h = 2.0 / kMomentNodes;
        CompensatedSum s;
        for (int i = 1; i < kMomentNodes; ++i) s.add(raw_bump(-1.0 + i * h));
        return s.value() * h;
    }();
    return mass;
}

// m-th derivative of exp(phi), phi = -1/(1-x^2), via
// y^(m) = sum_k C(m-1, k) phi^(k+1) y^(m-1-k).
template <class T>
T raw_bump_derivative(int m, T x) {
    if (!(std::abs(x) < 1)) return 0;
    const T p = 1 - x, q = 1 + x;
    std::array<T, 32> dphi_buf{}, y_buf{};
    std::vector<T> dphi_heap, y_heap;
    T* dphi = dphi_buf.data();
    T* y = y_buf.data();
    if (m + 1 > 32) {
        dphi_heap.resize(m + 1);
        y_heap.resize(m + 1);
        dphi = dphi_heap.data();
        y = y_heap.data();
    }
    T fact = 1;
    for (int k = 1; k <= m; ++k) {
        fact *= k;
        const T sign = k % 2 == 0 ? 1 : -1;
        dphi[k] = -T(0.5) * fact * (1 / std::pow(p, k + 1) + sign / std::pow(q, k + 1));
    }
    y[0] = std::exp(-T(0.5) * (1 / p + 1 / q));
    for (int r = 1; r <= m; ++r) {
        T acc = 0, binom = 1;
        for (int k = 0; k <= r - 1; ++k) {
            acc += binom * dphi[k + 1] * y[r - 1 - k];
            binom = binom * (r - 1 - k) / (k + 1);
        }
        y[r] = acc;
    }
    return y[m];
}

struct QuadratureRule {
    std::vector<double> x;       // positive half nodes
    std::vector<double> weight;  // includes the mirror node
    double center = 0.0;         // weight at x = 0
};

const QuadratureRule& bump_rule() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        const double h = 2.0 / kQuadratureNodes;
        const double c = bump_mass();
        r.center = h * raw_bump(0.0) / c;
        for (int i = 1; i < kQuadratureNodes / 2; ++i) {
            const double x = i * h;
            r.x.push_back(x);
            r.weight.push_back(2.0 * h * raw_bump(x) / c);
        }
        return r;
    }();
    return rule;
}

// Samples of b^(k) on the interior trapezoidal nodes of [-1, 1], in extended
// precision (high derivatives cancel heavily under quadrature).
struct DerivativeSamples {
    using real = long double;
    std::vector<real> t;
    std::vector<std::vector<real>> values;  // [k][i]

    explicit DerivativeSamples(int max_order) : values(max_order + 1) {
        const real h = real(2) / kMomentNodes;
        for (int i = 1; i < kMomentNodes; ++i) t.push_back(-1 + i * h);
        const real c = bump_mass();
        for (int k = 0; k <= max_order; ++k)
            for (real x : t) values[k].push_back(raw_bump_derivative<real>(k, x) / c);
    }
    // int t^p b^(k)(t) dt
    double moment(int p, int k) const {
        real s = 0;
        for (std::size_t i = 0; i < t.size(); ++i) s += std::pow(t[i], p) * values[k][i];
        return static_cast<double>(s * 2 / kMomentNodes);
    }
    // int b^(k)(t) cos(eta t) dt for even k
    double cosine_transform(int k, double eta) const {
        const auto key = std::make_pair(k, eta);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        const std::size_t mid = t.size() / 2;  // t[mid] = 0
        real s = values[k][mid];
        for (std::size_t i = mid + 1; i < t.size(); ++i)
            s += 2 * values[k][i] * std::cos(eta * static_cast<double>(t[i]));
        const double v = static_cast<double>(s * 2 / kMomentNodes);
        cache.emplace(key, v);
        return v;
    }
    mutable std::map<std::pair<int, double>, double> cache;
};

// Compositions m of N into n nonnegative parts with multinomial weights N! / prod m_l!.
struct Composition {
    std::vector<int> m;
    double weight;
};

std::vector<Composition> compositions(int N, std::size_t n) {
    std::vector<Composition> out;
    std::vector<int> m(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int left) {
        if (axis + 1 == n) {
            m[axis] = left;
            double w = std::tgamma(N + 1.0);
            for (int v : m) w /= std::tgamma(v + 1.0);
            out.push_back({m, std::round(w)});
            return;
        }
        for (int v = left; v >= 0; --v) {
            m[axis] = v;
            rec(axis + 1, left - v);
        }
    };
    rec(0, N);
    return out;
}

// All multi-indices with |alpha| <= order.
std::vector<std::vector<int>> multi_indices(int order, std::size_t n) {
    std::vector<std::vector<int>> out;
    std::vector<int> alpha(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int left) {
        if (axis == n) {
            out.push_back(alpha);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            alpha[axis] = v;
            rec(axis + 1, left - v);
        }
        alpha[axis] = 0;
    };
    rec(0, order);
    return out;
}

// Signed lattice coordinate in [-L/2, L/2).
double centered_coordinate(const GridSpec& spec, std::size_t axis, int i) {
    const int N = spec.points(axis);
    const int s = i < N / 2 ? i : i - N;
    return s * spec.spacing(axis);
}

// Periodic lattice distance table |i| h, |i| = min(i, N - i).
std::vector<double> distance_weights(const GridSpec& spec, std::size_t axis, int j, double a, double r) {
    const int N = spec.points(axis);
    const double h = spec.spacing(axis);
    const double scale = std::exp2(j * a);
    std::vector<double> w(N);
    for (int d = 0; d < N; ++d) {
        const int dd = std::min(d, N - d);
        w[d] = std::pow(1.0 + scale * (dd * h), r);
    }
    return w;
}

void check_pair(const SpectralFunction& u, const SpaceParams& params, const KernelPair& kp) {
    if (params.a.size() != u.spec().dim() || kp.dim() != u.spec().dim())
        throw UsageError("dimension mismatch between function, anisotropy and kernels");
    if (params.pq.size() != u.spec().dim()) throw UsageError("p has the wrong number of entries");
}

void require_s_range(double s, const KernelPair& kp, const AnisotropyVector& a) {
    const double bound = 2.0 * kp.N() * a.min();
    if (!(s < bound)) {
        std::ostringstream os;
        os << "s = " << s << " but 2*N*a_min = " << bound << " (N = " << kp.N() << ")";
        throw PreconditionError("s < 2*N*a_min", os.str());
    }
}

std::vector<double> weighted_moduli(const GridFunction& g, double weight) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = weight * std::abs(g[i]);
    return out;
}

// Pointwise l_q accumulator over levels.
class LevelAccumulator {
public:
    LevelAccumulator(std::size_t size, double q) : q_(q), acc_(size, 0.0) {}
    void add(std::span<const double> v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (std::isinf(q_))
                acc_[i] = std::max(acc_[i], v[i]);
            else
                acc_[i] += std::pow(v[i], q_);
        }
    }
    std::vector<double> result() const {
        if (std::isinf(q_)) return acc_;
        std::vector<double> out(acc_.size());
        for (std::size_t i = 0; i < acc_.size(); ++i) out[i] = std::pow(acc_[i], 1.0 / q_);
        return out;
    }

private:
    double q_;
    std::vector<double> acc_;
};

// Decides when the level sequence has converged.
class LevelStop {
public:
    LevelStop(int top, double tolerance, int cap) : top_(top), tol_(tolerance), cap_(cap) {}
    bool done(int j, double level_norm) {
        peak_ = std::max(peak_, level_norm);
        quiet_ = level_norm <= tol_ * peak_ ? quiet_ + 1 : 0;
        return j >= cap_ || (j > top_ && quiet_ >= 2);
    }

private:
    int top_;
    double tol_;
    int cap_;
    double peak_ = 0.0;
    int quiet_ = 0;
};

template <class F>
void for_each_index(const GridSpec& spec, F&& f) {
    const std::size_t n = spec.dim();
    std::vector<int> idx(n, 0);
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        f(flat, std::span<const int>(idx));
        for (std::size_t l = 0; l < n; ++l) {
            if (++idx[l] < spec.points(l)) break;
            idx[l] = 0;
        }
    }
}

}  // namespace

double bump(double x) { return raw_bump(x) / bump_mass(); }

double bump_derivative(int m, double x) {
    if (m < 0) throw UsageError("derivative order must be nonnegative");
    if (m == 0) return bump(x);
    return raw_bump_derivative<double>(m, x) / bump_mass();
}

double bump_hat(double eta) {
    const auto& r = bump_rule();
    double s = r.center;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.weight[i] * std::cos(eta * r.x[i]);
    return s;
}

BumpTransform::BumpTransform(double eta_max) : eta_max_(std::max(eta_max, 1.0)), step_(1.0 / 64) {
    const auto& r = bump_rule();
    const std::size_t count = static_cast<std::size_t>(std::ceil(eta_max_ / step_)) + 2;
    value_.resize(count);
    slope_.resize(count);
    parallel_for(count, [&](std::size_t k) {
        const double eta = k * step_;
        double v = r.center, d = 0.0;
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const double t = eta * r.x[i];
            v += r.weight[i] * std::cos(t);
            d -= r.weight[i] * r.x[i] * std::sin(t);
        }
        value_[k] = v;
        slope_[k] = d;
    });
}

double BumpTransform::operator()(double eta) const {
    eta = std::abs(eta);
    if (eta > eta_max_) return bump_hat(eta);
    const double pos = eta / step_;
    const std::size_t k = std::min(static_cast<std::size_t>(pos), value_.size() - 2);
    const double t = pos - k;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * value_[k] + h10 * step_ * slope_[k] + h01 * value_[k + 1] + h11 * step_ * slope_[k + 1];
}

KernelPair::KernelPair(int N, double radius, std::size_t n, GridSpec spec)
    : N_(N), radius_(radius), n_(n), w_(radius / std::sqrt(static_cast<double>(n))), k0_(spec), k_(std::move(spec)) {
    for (auto& c : compositions(N, n)) {
        terms_.push_back(std::move(c.m));
        term_weights_.push_back(c.weight);
    }
}

double KernelPair::k0_value(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t l = 0; l < n_; ++l) v *= bump(x[l] / w_) / w_;
    return v;
}

double KernelPair::k_value(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        double v = term_weights_[t];
        for (std::size_t l = 0; l < n_; ++l) {
            const int m = 2 * terms_[t][l];
            v *= bump_derivative(m, x[l] / w_) / std::pow(w_, m + 1);
        }
        total += v;
    }
    return total;
}

double KernelPair::k0_hat(std::span<const double> eta) const {
    double v = 1.0;
    for (std::size_t l = 0; l < n_; ++l) v *= bump_hat(w_ * eta[l]);
    return v;
}

double KernelPair::k_hat(std::span<const double> eta) const {
    double r2 = 0.0;
    for (std::size_t l = 0; l < n_; ++l) r2 += eta[l] * eta[l];
    return std::pow(-r2, N_) * k0_hat(eta);
}

KernelPair build_kernels(int N, double radius, const AnisotropyVector& a, const GridSpec& spec) {
    if (N < 1) throw UsageError("Laplacian power N must be positive");
    if (!(radius > 0.0 && radius <= 1.0)) throw DomainError("kernel radius must lie in (0, 1]");
    const std::size_t n = spec.dim();
    if (a.size() != n) throw UsageError("anisotropy and grid dimensions differ");
    for (std::size_t l = 0; l < n; ++l) {
        const double across = 2.0 * radius / spec.spacing(l);
        if (across < 16.0) {
            std::ostringstream os;
            os << "kernel under-resolved: " << across << " points across the support on axis " << l + 1
               << ", at least 16 required";
            throw ConfigError(os.str());
        }
    }

    KernelPair kp(N, radius, n, spec);
    const double w = kp.half_width();

    // Samples, centered at the origin.
    std::vector<double> x(n);
    double outside = 0.0;
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        std::vector<int> idx(n);
        spec.unravel(flat, idx);
        double r2 = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            x[l] = centered_coordinate(spec, l, idx[l]);
            r2 += x[l] * x[l];
        }
        const double v0 = kp.k0_value(x), v = kp.k_value(x);
        kp.k0_[flat] = v0;
        kp.k_[flat] = v;
        if (std::sqrt(r2) > radius) outside = std::max({outside, std::abs(v0), std::abs(v)});
    }
    kp.outside_support_max = outside;

    // Integrals and moments from one-dimensional factors:
    // int x^alpha k = sum_m c_m prod_l w^(alpha_l - 2 m_l) int t^alpha_l b^(2 m_l)(t) dt.
    const int order = kp.moment_order();
    const DerivativeSamples ds(2 * N);
    std::vector<std::vector<double>> mom(order + 1, std::vector<double>(2 * N + 1));
    for (int p = 0; p <= order; ++p)
        for (int k = 0; k <= 2 * N; k += 2) mom[p][k] = ds.moment(p, k);
    kp.integral_base = std::pow(mom[0][0], static_cast<double>(n));
    kp.integral_k0 = kp.integral_base;
    const auto comps = compositions(N, n);
    double residual = 0.0;
    for (const auto& alpha : multi_indices(order, n)) {
        double total = 0.0;
        for (const auto& c : comps) {
            double v = c.weight;
            for (std::size_t l = 0; l < n; ++l) v *= std::pow(w, alpha[l] - 2 * c.m[l]) * mom[alpha[l]][2 * c.m[l]];
            total += v;
        }
        residual = std::max(residual, std::abs(total));
    }
    kp.moment_residual = residual;

    // Spectral identity at 100 lattice frequencies: the closed form against the
    // quadrature transform of the analytic derivatives.
    double err = 0.0, scale = 0.0;
    std::vector<double> xi(n);
    for (int s = 0; s < 100; ++s) {
        const std::size_t flat = static_cast<std::size_t>(s) * spec.size() / 100;
        spec.frequency_at(flat, xi);
        const double closed = kp.k_hat(xi);
        double quad = 0.0;
        for (const auto& c : comps) {
            double v = c.weight;
            for (std::size_t l = 0; l < n; ++l)
                v *= std::pow(w, -2 * c.m[l]) * ds.cosine_transform(2 * c.m[l], w * xi[l]);
            quad += v;
        }
        err = std::max(err, std::abs(closed - quad));
        scale = std::max(scale, std::abs(closed));
    }
    kp.spectral_identity_error = scale > 0.0 ? err / scale : err;

    // Tauberian pair. bump_hat decreases on [0, pi], so on |xi|_a < 2 eps (inside the
    // box |xi_l| < (2 eps)^a_l) the floor is prod_l bump_hat(w (2 eps)^a_l); on the
    // corona |xi| >= min_l (eps / 2n)^a_l adds the factor |xi|^2N.
    const double cap = 0.9 * std::numbers::pi;
    double eps = kInf;
    for (std::size_t l = 0; l < n; ++l) eps = std::min(eps, 0.5 * std::pow(cap / w, 1.0 / a[l]));
    double floor0 = 1.0, inner = kInf;
    for (std::size_t l = 0; l < n; ++l) {
        floor0 *= bump_hat(std::min(cap, w * std::pow(2.0 * eps, a[l])));
        inner = std::min(inner, std::pow(eps / (2.0 * n), a[l]));
    }
    const double floor1 = std::pow(inner, 2.0 * N) * floor0;
    kp.tauberian = {eps, std::min(floor0, floor1)};

    std::ostringstream fail;
    if (!(std::abs(kp.integral_k0) >= 1e-3)) fail << "integral of k0 below 1e-3; ";
    if (!(kp.moment_residual <= 1e-8)) fail << "moment residual " << kp.moment_residual << " above 1e-8; ";
    if (!(kp.spectral_identity_error <= 1e-10))
        fail << "spectral identity error " << kp.spectral_identity_error << " above 1e-10; ";
    if (!(kp.outside_support_max <= 1e-14)) fail << "samples do not vanish outside the support; ";
    if (!(kp.tauberian.delta > 0.0)) fail << "Tauberian floor not positive; ";
    if (!fail.str().empty()) throw ConfigError("kernel certification failed: " + fail.str());
    return kp;
}

SpectralFunction kernel_level_spectrum(const KernelPair& kp, const AnisotropyVector& a, int j,
                                       const SpectralFunction& u) {
    const GridSpec& spec = u.spec();
    const std::size_t n = spec.dim();
    if (kp.dim() != n || a.size() != n) throw UsageError("dimension mismatch between kernels and function");
    if (j < 0) throw UsageError("level must be nonnegative");
    std::vector<std::vector<double>> hat(n), sq(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double scale = std::exp2(-j * a[l]);
        hat[l].resize(spec.points(l));
        sq[l].resize(spec.points(l));
        for (int i = 0; i < spec.points(l); ++i) {
            const double eta = scale * spec.frequency(l, i);
            hat[l][i] = bump_hat(kp.half_width() * eta);
            sq[l][i] = eta * eta;
        }
    }
    SpectralFunction out = u;
    const int N = kp.N();
    for_each_index(spec, [&](std::size_t flat, std::span<const int> idx) {
        double v = 1.0, r2 = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            v *= hat[l][idx[l]];
            r2 += sq[l][idx[l]];
        }
        if (j > 0) v *= std::pow(-r2, N);
        out[flat] *= v;
    });
    return out;
}

LocalMeansReport local_means_report(const SpectralFunction& u, const SpaceParams& params, const KernelPair& kp,
                                    const LocalMeansOptions& opt) {
    check_pair(u, params, kp);
    require_s_range(params.s, kp, params.a);
    std::optional<DecompositionSystem> own;
    const DecompositionSystem* sys = opt.sys;
    if (sys == nullptr) {
        own.emplace(params.a, u.spec());
        sys = &*own;
    } else if (!(sys->spec() == u.spec()) || !(sys->anisotropy() == params.a)) {
        throw UsageError("partition does not match the function's grid or anisotropy");
    }
    if (opt.policy == TailPolicy::enforce) certify_tail(*sys, u);

    LocalMeansReport rep;
    rep.tail = tail_fraction(*sys, u);
    const auto p = params.pq.p();
    const GridSpec& spec = u.spec();

    const GridFunction base = fft_inverse(kernel_level_spectrum(kp, params.a, 0, u));
    rep.base_term = lp_vec_norm(base, p);
    rep.level_norms.push_back(rep.base_term);

    LevelAccumulator acc(spec.size(), params.pq.q());
    LevelStop stop(sys->levels(), opt.tolerance, opt.max_levels);
    for (int j = 1;; ++j) {
        const GridFunction g = fft_inverse(kernel_level_spectrum(kp, params.a, j, u));
        const auto v = weighted_moduli(g, std::exp2(params.s * j));
        const double level = lp_vec_norm(v, spec, p);
        rep.level_norms.push_back(level);
        acc.add(v);
        if (stop.done(j, level)) break;
    }
    rep.sequence_term = lp_vec_norm(acc.result(), spec, p);
    rep.value = rep.base_term + rep.sequence_term;
    return rep;
}

double local_means_norm(const GridFunction& u, const SpaceParams& params, const KernelPair& kp,
                        const LocalMeansOptions& opt) {
    return local_means_report(fft_forward(u), params, kp, opt).value;
}

GridFunction peetre_maximal(const GridFunction& conv, int j, const MaximalParams& mp, const AnisotropyVector& a) {
    const GridSpec& spec = conv.spec();
    const std::size_t n = spec.dim();
    if (mp.r.size() != n || a.size() != n) throw UsageError("Peetre exponents or anisotropy have the wrong length");
    for (double r : mp.r)
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("Peetre exponents must be positive and finite");

    std::vector<double> cur = conv.moduli(), next(cur.size());
    for (std::size_t l = 0; l < n; ++l) {
        const int N = spec.points(l);
        const std::size_t stride = spec.stride(l);
        const auto w = distance_weights(spec, l, j, a[l], mp.r[l]);
        const std::size_t lines = spec.size() / N;
        // Line k: base offset with index 0 on axis l.
        parallel_for(lines, [&](std::size_t k) {
            const std::size_t base = (k / stride) * stride * N + k % stride;
            for (int x = 0; x < N; ++x) {
                double best = 0.0;
                for (int y = 0; y < N; ++y) {
                    const int d = x >= y ? x - y : y - x;
                    best = std::max(best, cur[base + y * stride] / w[d]);
                }
                next[base + x * stride] = best;
            }
        });
        std::swap(cur, next);
    }
    std::vector<cplx> out(cur.begin(), cur.end());
    return GridFunction(spec, std::move(out));
}

GridFunction peetre_maximal(const SpectralFunction& u, int j, const std::function<double(std::span<const double>)>& symbol,
                            const MaximalParams& mp, const AnisotropyVector& a) {
    SpectralFunction c = u;
    c.multiply([&](std::span<const double> xi) { return cplx(symbol(xi)); });
    return peetre_maximal(fft_inverse(c), j, mp, a);
}

ThetaSet default_theta_set(std::size_t n) {
    if (n < 2) throw UsageError("the parameter set acts on the first n-1 variables; needs n >= 2");
    ThetaSet t;
    t.m = n - 1;
    const std::size_t m = t.m;
    auto identity = [m](double d) {
        std::vector<double> A(m * m, 0.0);
        for (std::size_t i = 0; i < m; ++i) A[i * m + i] = d;
        return A;
    };
    if (m == 1) {
        for (double v : {1.0, -1.0, 0.5, -0.5, 1.5, -1.5, 0.75, -0.75}) t.maps.push_back({v});
    } else {
        const double c = std::sqrt(0.5);
        t.maps.push_back(identity(1.0));
        t.maps.push_back(identity(-1.0));
        auto rot45 = identity(1.0);
        rot45[0] = c, rot45[1] = -c, rot45[m] = c, rot45[m + 1] = c;
        t.maps.push_back(rot45);
        auto rot90 = identity(1.0);
        rot90[0] = 0.0, rot90[1] = -1.0, rot90[m] = 1.0, rot90[m + 1] = 0.0;
        t.maps.push_back(rot90);
        auto shear_p = identity(1.0);
        shear_p[1] = 0.5;
        t.maps.push_back(shear_p);
        auto shear_m = identity(1.0);
        shear_m[1] = -0.5;
        t.maps.push_back(shear_m);
        auto d1 = identity(1.0);
        d1[0] = 1.5, d1[m + 1] = 0.75;
        t.maps.push_back(d1);
        auto d2 = identity(1.0);
        d2[0] = 0.75, d2[m + 1] = 1.5;
        t.maps.push_back(d2);
    }
    t.min_abs_det = kInf;
    for (const auto& A : t.maps) {
        // Determinant by elimination with partial pivoting.
        std::vector<double> B = A;
        double det = 1.0;
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < m; ++r)
                if (std::abs(B[r * m + c]) > std::abs(B[piv * m + c])) piv = r;
            if (piv != c) {
                for (std::size_t k = 0; k < m; ++k) std::swap(B[c * m + k], B[piv * m + k]);
                det = -det;
            }
            det *= B[c * m + c];
            for (std::size_t r = c + 1; r < m; ++r) {
                const double f = B[r * m + c] / B[c * m + c];
                for (std::size_t k = c; k < m; ++k) B[r * m + k] -= f * B[c * m + k];
            }
        }
        t.min_abs_det = std::min(t.min_abs_det, std::abs(det));
        for (double v : A) t.max_entry = std::max(t.max_entry, std::abs(v));
    }
    return t;
}

ThetaKernelSymbol::ThetaKernelSymbol(const KernelPair& kp, const AnisotropyVector& a, std::span<const double> map,
                                     std::shared_ptr<const BumpTransform> table)
    : kp_(&kp), a_(a), m_(kp.dim() - 1), inv_t_(m_ * m_), table_(std::move(table)) {
    const std::size_t m = m_;
    if (map.size() != m * m) throw UsageError("map has the wrong size");
    // Gauss-Jordan inverse, stored transposed.
    std::vector<double> B(map.begin(), map.end()), I(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) I[i * m + i] = 1.0;
    double det = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::abs(B[r * m + c]) > std::abs(B[piv * m + c])) piv = r;
        if (B[piv * m + c] == 0.0) throw DomainError("map is singular");
        if (piv != c) {
            for (std::size_t k = 0; k < m; ++k) {
                std::swap(B[c * m + k], B[piv * m + k]);
                std::swap(I[c * m + k], I[piv * m + k]);
            }
            det = -det;
        }
        const double d = B[c * m + c];
        det *= d;
        for (std::size_t k = 0; k < m; ++k) {
            B[c * m + k] /= d;
            I[c * m + k] /= d;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = B[r * m + c];
            for (std::size_t k = 0; k < m; ++k) {
                B[r * m + k] -= f * B[c * m + k];
                I[r * m + k] -= f * I[c * m + k];
            }
        }
    }
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) inv_t_[r * m + c] = I[c * m + r];
    inv_det_ = 1.0 / std::abs(det);
}

double ThetaKernelSymbol::operator()(int j, std::span<const double> xi) const {
    const std::size_t n = m_ + 1;
    std::array<double, 16> eta_buf{}, mapped_buf{};
    std::vector<double> heap;
    double* eta = eta_buf.data();
    double* mapped = mapped_buf.data();
    if (n > eta_buf.size()) {
        heap.resize(2 * n);
        eta = heap.data();
        mapped = heap.data() + n;
    }
    for (std::size_t l = 0; l < n; ++l) eta[l] = std::exp2(-j * a_[l]) * xi[l];
    for (std::size_t r = 0; r < m_; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m_; ++c) s += inv_t_[r * m_ + c] * eta[c];
        mapped[r] = s;
    }
    mapped[m_] = eta[m_];
    double v = inv_det_, r2 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        v *= (*table_)(kp_->half_width() * mapped[l]);
        r2 += mapped[l] * mapped[l];
    }
    if (j > 0) v *= std::pow(-r2, kp_->N());
    return v;
}

double ThetaKernelSymbol::max_argument(const GridSpec& spec) const {
    const std::size_t n = m_ + 1;
    std::vector<double> top(n);
    for (std::size_t l = 0; l < n; ++l) top[l] = std::numbers::pi * spec.points(l) / spec.length(l);
    double best = top[m_];
    for (std::size_t r = 0; r < m_; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m_; ++c) s += std::abs(inv_t_[r * m_ + c]) * top[c];
        best = std::max(best, s);
    }
    return kp_->half_width() * best;
}

MaximalReport maximal_inequality_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                                            const MaximalParams& mp, const KernelPair& psi, const KernelPair& phi,
                                            const ThetaSet& theta, double tolerance) {
    MaximalReport rep;
    rep.theta = theta;
    if (family.empty()) return rep;
    const GridSpec& spec = family.front().spec();
    const std::size_t n = spec.dim();
    if (params.a.size() != n || params.pq.size() != n || psi.dim() != n || phi.dim() != n)
        throw UsageError("dimension mismatch in the maximal experiment");
    require_s_range(params.s, psi, params.a);
    if (mp.r.size() != n) throw UsageError("Peetre exponents have the wrong length");
    const double lim = std::min(params.pq.q(), params.pq.p_min());
    for (std::size_t l = 0; l < n; ++l) {
        if (!(mp.r[l] > 0.0 && 1.0 / mp.r[l] < lim)) {
            std::ostringstream os;
            os << "r_" << l + 1 << " = " << mp.r[l] << " but 1/r must be below min(q, p) = " << lim;
            throw PreconditionError("1/r_l < min(q, p_1..p_n)", os.str());
        }
    }
    if (!theta.maps.empty() && theta.m != n - 1) throw UsageError("parameter maps act on the wrong dimension");

    std::vector<ThetaKernelSymbol> symbols;
    if (!theta.maps.empty()) {
        auto probe_table = std::make_shared<const BumpTransform>(1.0);
        double top = 1.0;
        for (const auto& A : theta.maps) top = std::max(top, ThetaKernelSymbol(psi, params.a, A, probe_table).max_argument(spec));
        auto table = std::make_shared<const BumpTransform>(1.01 * top + 1.0);
        for (const auto& A : theta.maps) symbols.emplace_back(psi, params.a, A, table);
    }
    const DecompositionSystem sys(params.a, spec);
    const auto p = params.pq.p();
    const double q = params.pq.q();

    rep.rows.resize(family.size());
    for (std::size_t f = 0; f < family.size(); ++f) {
        const GridFunction& u = family[f];
        if (!(u.spec() == spec)) throw UsageError("family members use different grids");
        const SpectralFunction uc = fft_forward(u);
        MaximalRow row;
        row.id = static_cast<int>(f);
        LevelAccumulator l31(spec.size(), q), r31(spec.size(), q), l32(spec.size(), q), r32(spec.size(), q);
        LevelStop stop_psi(sys.levels(), tolerance, 200), stop_phi(sys.levels(), tolerance, 200);
        bool psi_done = false, phi_done = false;
        for (int j = 0; !(psi_done && phi_done); ++j) {
            const double weight = j == 0 ? 1.0 : std::exp2(params.s * j);
            const GridFunction conv = fft_inverse(kernel_level_spectrum(psi, params.a, j, uc));
            const GridFunction star = peetre_maximal(conv, j, mp, params.a);
            for (std::size_t i = 0; i < conv.size(); ++i)
                if (star[i].real() < std::abs(conv[i])) ++row.domination_violations;
            const auto conv_w = weighted_moduli(conv, weight);
            const auto star_w = weighted_moduli(star, weight);
            r32.add(conv_w);
            l32.add(star_w);

            const GridFunction phi_conv = fft_inverse(kernel_level_spectrum(phi, params.a, j, uc));
            const auto phi_w = weighted_moduli(peetre_maximal(phi_conv, j, mp, params.a), weight);
            r31.add(phi_w);

            if (!symbols.empty()) {
                std::vector<double> sup(spec.size(), 0.0);
                for (const auto& sym : symbols) {
                    const GridFunction m =
                        peetre_maximal(uc, j, [&](std::span<const double> xi) { return sym(j, xi); }, mp, params.a);
                    for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], m[i].real());
                }
                for (double& v : sup) v *= weight;
                l31.add(sup);
            }
            psi_done = psi_done || stop_psi.done(j, lp_vec_norm(conv_w, spec, p));
            phi_done = phi_done || stop_phi.done(j, lp_vec_norm(phi_w, spec, p));
            row.levels = j + 1;
        }
        row.thm32_lhs = lp_vec_norm(l32.result(), spec, p);
        row.thm32_rhs = lp_vec_norm(r32.result(), spec, p);
        row.thm31_rhs = lp_vec_norm(r31.result(), spec, p);
        row.thm31_lhs = symbols.empty() ? 0.0 : lp_vec_norm(l31.result(), spec, p);
        rep.rows[f] = row;
    }
    for (const auto& row : rep.rows) {
        rep.thm32.add(row.thm32_lhs, row.thm32_rhs);
        if (symbols.empty())
            rep.thm31.add(0.0, 0.0);
        else
            rep.thm31.add(row.thm31_lhs, row.thm31_rhs);
        rep.domination_violations += row.domination_violations;
    }
    return rep;
}

RatioStats local_means_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                                  const KernelPair& kp, const DecompositionSystem& sys) {
    std::vector<double> lhs(family.size()), rhs(family.size());
    LocalMeansOptions opt;
    opt.sys = &sys;
    parallel_for(family.size(), [&](std::size_t i) {
        const SpectralFunction uc = fft_forward(family[i]);
        lhs[i] = local_means_report(uc, params, kp, opt).value;
        rhs[i] = f_norm(uc, params, sys);
    });
    RatioStats st;
    for (std::size_t i = 0; i < family.size(); ++i) st.add(lhs[i], rhs[i]);
    return st;
}

bool Box::contains(std::span<const double> x) const {
    for (std::size_t l = 0; l < lo.size(); ++l)
        if (!(x[l] >= lo[l] && x[l] < hi[l])) return false;
    return true;
}

double Box::margin_to(const Box& inner) const {
    double m = kInf;
    for (std::size_t l = 0; l < lo.size(); ++l) m = std::min({m, inner.lo[l] - lo[l], hi[l] - inner.hi[l]});
    return m;
}

Box numerical_support(const GridFunction& f) {
    const GridSpec& spec = f.spec();
    const std::size_t n = spec.dim();
    const double cut = 1e-15 * f.max_abs();
    Box b{std::vector<double>(n, kInf), std::vector<double>(n, -kInf)};
    std::vector<double> x(n);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(std::abs(f[i]) > cut)) continue;
        spec.point_at(i, x);
        for (std::size_t l = 0; l < n; ++l) {
            b.lo[l] = std::min(b.lo[l], x[l]);
            b.hi[l] = std::max(b.hi[l], x[l]);
        }
    }
    return b;
}

InfimumReport attained_infimum_experiment(const GridFunction& f, const Box& U, std::span<const GridFunction> perturbations,
                                          const KernelPair& kp, const SpaceParams& params,
                                          const LocalMeansOptions& opt) {
    const GridSpec& spec = f.spec();
    const std::size_t n = spec.dim();
    if (U.lo.size() != n || U.hi.size() != n) throw UsageError("box has the wrong dimension");
    const Box supp = numerical_support(f);
    if (!(f.max_abs() > 0.0)) throw PreconditionError("f nonzero", "f vanishes identically");
    const double margin = U.margin_to(supp);
    if (!(margin > 2.0 * kp.support_radius())) {
        std::ostringstream os;
        os << "dist(supp f, complement of U) = " << margin << " is not above 2r = " << 2.0 * kp.support_radius();
        throw PreconditionError("dist(supp f, complement of U) > 2r", os.str());
    }
    GridFunction base(spec);
    std::vector<double> x(n);
    std::vector<bool> inside(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        spec.point_at(i, x);
        inside[i] = U.contains(x);
        if (inside[i]) base[i] = f[i];
    }
    for (std::size_t k = 0; k < perturbations.size(); ++k) {
        const GridFunction& g = perturbations[k];
        if (!(g.spec() == spec)) throw UsageError("perturbation uses a different grid");
        const double cut = 1e-15 * g.max_abs();
        if (!(g.max_abs() > 0.0)) throw PreconditionError("g nonzero", "perturbation " + std::to_string(k) + " is zero");
        for (std::size_t i = 0; i < spec.size(); ++i)
            if (inside[i] && std::abs(g[i]) > cut)
                throw PreconditionError("g vanishes on U",
                                        "perturbation " + std::to_string(k) + " is nonzero inside U");
    }

    LocalMeansOptions o = opt;
    std::optional<DecompositionSystem> own;
    if (o.sys == nullptr) {
        own.emplace(params.a, spec);
        o.sys = &*own;
    }
    InfimumReport rep;
    rep.base_norm = local_means_report(fft_forward(base), params, kp, o).value;
    rep.gaps.resize(perturbations.size());
    parallel_for(perturbations.size(), [&](std::size_t k) {
        rep.gaps[k] = local_means_report(fft_forward(base + perturbations[k]), params, kp, o).value - rep.base_norm;
    });
    rep.min_gap = rep.gaps.empty() ? 0.0 : *std::min_element(rep.gaps.begin(), rep.gaps.end());
    rep.all_increase = !rep.gaps.empty() && rep.min_gap > 1e-12;
    return rep;
}

}  // namespace anisoft
