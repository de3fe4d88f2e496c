#include "anisoft/multipliers.hpp"

#include "anisoft/errors.hpp"
#include "anisoft/parallel.hpp"
#include "anisoft/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace anisoft {

MultiplierSymbol::MultiplierSymbol(SymbolKind kind, Fn fn, double order, std::string description)
    : kind_(kind), fn_(std::move(fn)), order_(order), description_(std::move(description)) {}

MultiplierSymbol MultiplierSymbol::reciprocal() const {
    Fn f = fn_;
    return MultiplierSymbol(SymbolKind::custom, [f](std::span<const double> xi) { return 1.0 / f(xi); }, -order_,
                            "1/(" + description_ + ")");
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

MultiplierSymbol lambda_symbol(const AnisotropyVector& a, double r) {
    std::vector<double> e(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) e[k] = r / (2 * a[k]);
    return MultiplierSymbol(
        SymbolKind::lambda_r,
        [e](std::span<const double> xi) {
            double s = 0.0;
            for (std::size_t k = 0; k < e.size(); ++k) s += std::pow(1.0 + xi[k] * xi[k], e[k]);
            return cplx(s);
        },
        r, "lambda_r(r=" + fmt(r) + ")");
}

MultiplierSymbol xi_symbol(const AnisotropyVector& a, double t) {
    const AnisotropyVector b = a.prepend_unit();
    return MultiplierSymbol(
        SymbolKind::xi_t,
        [b, t](std::span<const double> xi) {
            if (t == 0.0) return cplx(1.0);
            AnisoPoint y(xi.size() + 1);
            y[0] = 1.0;
            std::copy(xi.begin(), xi.end(), y.begin() + 1);
            return cplx(std::pow(aniso_distance(b, y), t));
        },
        t, "xi^t(t=" + fmt(t) + ")");
}

MultiplierSymbol axis_power_symbol(const AnisotropyVector& a, int k, double mu) {
    if (k < 1 || k > static_cast<int>(a.size()))
        throw UsageError("axis " + std::to_string(k) + " outside [1, " + std::to_string(a.size()) + "]");
    const std::size_t axis = static_cast<std::size_t>(k - 1);
    return MultiplierSymbol(
        SymbolKind::axis_power,
        [axis, mu](std::span<const double> xi) { return cplx(std::pow(1.0 + xi[axis] * xi[axis], mu)); },
        2 * mu * a[axis], "axis_power(k=" + std::to_string(k) + ";mu=" + fmt(mu) + ")");
}

MultiplierSymbol derivative_symbol(const AnisotropyVector& a, std::span<const int> alpha) {
    const double order = a.dot(alpha);
    std::vector<int> al(alpha.begin(), alpha.end());
    std::string desc = "D^(";
    for (std::size_t j = 0; j < al.size(); ++j) desc += (j ? "," : "") + std::to_string(al[j]);
    desc += ")";
    return MultiplierSymbol(
        SymbolKind::custom,
        [al](std::span<const double> xi) {
            cplx v = 1.0;
            for (std::size_t j = 0; j < al.size(); ++j)
                for (int m = 0; m < al[j]; ++m) v *= cplx(0.0, xi[j]);
            return v;
        },
        order, desc);
}

MultiplierSymbol custom_symbol(MultiplierSymbol::Fn fn, double order, std::string description) {
    return MultiplierSymbol(SymbolKind::custom, std::move(fn), order, std::move(description));
}

MultiplierSymbol product(const MultiplierSymbol& lhs, const MultiplierSymbol& rhs) {
    return MultiplierSymbol(
        SymbolKind::custom, [lhs, rhs](std::span<const double> xi) { return lhs(xi) * rhs(xi); },
        lhs.order() + rhs.order(), lhs.description() + "*" + rhs.description());
}

SpectralFunction multiply_spectrum(const MultiplierSymbol& sym, const SpectralFunction& u) {
    const GridSpec& spec = u.spec();
    std::vector<cplx> c(u.coeffs().begin(), u.coeffs().end());
    std::vector<double> xi(spec.dim());
    for (std::size_t f = 0; f < c.size(); ++f) {
        spec.frequency_at(f, xi);
        const cplx v = sym(xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("symbol " + sym.description() + " is not finite on the lattice");
        c[f] *= v;
    }
    return SpectralFunction(spec, std::move(c));
}

GridFunction apply_multiplier(const MultiplierSymbol& sym, const SpectralFunction& u) {
    return fft_inverse(multiply_spectrum(sym, u));
}

GridFunction lift_roundtrip(const AnisotropyVector& a, double r, const SpectralFunction& u) {
    const auto lam = lambda_symbol(a, r);
    return apply_multiplier(lam.reciprocal(), multiply_spectrum(lam, u));
}

std::vector<AnisoPoint> corona_samples(const AnisotropyVector& a) {
    const std::size_t n = a.size();
    std::vector<AnisoPoint> dirs;
    if (n == 1) {
        dirs = {{1.0}, {-1.0}};
    } else if (n == 2) {
        for (int i = 0; i < 100; ++i) {
            const double th = 2 * std::numbers::pi * (i + 0.5) / 100;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else {
        Rng rng(0x5eed);
        while (dirs.size() < 100) {
            AnisoPoint w(n);
            double s = 0.0;
            for (auto& v : w) {
                v = rng.normal();
                s += v * v;
            }
            if (s < 1e-12) continue;
            for (auto& v : w) v /= std::sqrt(s);
            dirs.push_back(w);
        }
    }
    std::vector<AnisoPoint> out;
    for (int i = 0; i < 10; ++i) {
        const double rho = 0.25 * std::pow(16.0, i / 9.0);
        for (const auto& w : dirs) out.push_back(aniso_dilate(a, rho, w));
    }
    return out;
}

namespace {

double binom(int m, int i) {
    double b = 1.0;
    for (int k = 1; k <= i; ++k) b = b * (m - i + k) / k;
    return b;
}

double stencil(const std::function<double(std::span<const double>)>& f, std::span<const double> xi,
               std::span<const int> alpha, double h) {
    const std::size_t n = xi.size();
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (std::size_t l = 0; l < n; ++l) {
            const int m = alpha[l];
            w *= (idx[l] % 2 ? -1.0 : 1.0) * binom(m, idx[l]);
            x[l] = xi[l] + (0.5 * m - idx[l]) * h;
        }
        sum += w * f(x);
        std::size_t l = 0;
        while (l < n && idx[l] == alpha[l]) {
            idx[l] = 0;
            ++l;
        }
        if (l == n) break;
        ++idx[l];
    }
    int order = 0;
    for (int m : alpha) order += m;
    return sum / std::pow(h, order);
}

}  // namespace

double finite_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> xi,
                         std::span<const int> alpha, double h) {
    int order = 0;
    for (int m : alpha) order += m;
    if (order == 0) return f(xi);
    return (4.0 * stencil(f, xi, alpha, 0.5 * h) - stencil(f, xi, alpha, h)) / 3.0;
}

double symbol_seminorm(const MultiplierSymbol& sym, const AnisotropyVector& a, std::span<const int> alpha, int J) {
    if (alpha.size() != a.size()) throw UsageError("multi-index length does not match anisotropy");
    if (J < 0) throw UsageError("level cap must be nonnegative");
    int order = 0;
    for (int m : alpha) {
        if (m < 0) throw UsageError("multi-index entries must be nonnegative");
        order += m;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double h = std::max(1e-4, std::pow(eps, 1.0 / (order + 2)));
    const auto pts = corona_samples(a);
    const double r = sym.order();
    std::vector<double> per_level(J + 1, 0.0);
    parallel_for(static_cast<std::size_t>(J + 1), [&](std::size_t j) {
        const double scale = std::pow(2.0, static_cast<double>(j));
        auto dilated = [&](std::span<const double> xi) {
            AnisoPoint y(xi.size());
            for (std::size_t l = 0; l < y.size(); ++l) y[l] = std::pow(scale, a[l]) * xi[l];
            return sym(y);
        };
        auto re = [&](std::span<const double> xi) { return dilated(xi).real(); };
        auto im = [&](std::span<const double> xi) { return dilated(xi).imag(); };
        double best = 0.0;
        for (const auto& p : pts) {
            const double dr = finite_difference(re, p, alpha, h);
            const double di = finite_difference(im, p, alpha, h);
            best = std::max(best, std::hypot(dr, di));
        }
        per_level[j] = best * std::pow(2.0, -static_cast<double>(j) * r);
    });
    return *std::max_element(per_level.begin(), per_level.end());
}

std::vector<SeminormEntry> seminorm_scan(const MultiplierSymbol& sym, const AnisotropyVector& a, int max_order,
                                         int J) {
    const std::size_t n = a.size();
    std::vector<SeminormEntry> out;
    for (int total = 0; total <= max_order; ++total) {
        // all alpha with |alpha| = total, lexicographic (first axis most significant, descending)
        std::vector<int> alpha(n, 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t l, int left) {
            if (l + 1 == n) {
                alpha[l] = left;
                out.push_back({alpha, symbol_seminorm(sym, a, alpha, J)});
                return;
            }
            for (int m = left; m >= 0; --m) {
                alpha[l] = m;
                rec(l + 1, left - m);
            }
        };
        rec(0, total);
    }
    return out;
}

}  // namespace anisoft
