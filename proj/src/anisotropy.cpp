#include "anisoft/anisotropy.hpp"

#include "anisoft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace anisoft {

AnisotropyVector::AnisotropyVector(std::vector<double> weights) : a_(std::move(weights)) {
    if (a_.empty())
        throw DomainError("anisotropy vector must have at least one entry");
    for (std::size_t j = 0; j < a_.size(); ++j) {
        if (!std::isfinite(a_[j]) || a_[j] < 1.0)
            throw DomainError("anisotropy weight a_" + std::to_string(j + 1) + " = " +
                              std::to_string(a_[j]) + " must be finite and >= 1");
    }
    a_min_ = *std::min_element(a_.begin(), a_.end());
    a_sum_ = std::accumulate(a_.begin(), a_.end(), 0.0);
}

AnisotropyVector AnisotropyVector::prepend_unit() const {
    std::vector<double> w;
    w.reserve(a_.size() + 1);
    w.push_back(1.0);
    w.insert(w.end(), a_.begin(), a_.end());
    return AnisotropyVector(std::move(w));
}

AnisotropyVector AnisotropyVector::scaled(double lambda) const {
    std::vector<double> w(a_);
    for (auto& v : w) v *= lambda;
    return AnisotropyVector(std::move(w));
}

double AnisotropyVector::dot(std::span<const int> alpha) const {
    if (alpha.size() != a_.size()) throw UsageError("multi-index length does not match anisotropy");
    double s = 0.0;
    for (std::size_t j = 0; j < a_.size(); ++j) s += a_[j] * alpha[j];
    return s;
}

namespace {

void check_point(const AnisotropyVector& a, std::span<const double> x) {
    if (x.size() != a.size())
        throw UsageError("point has " + std::to_string(x.size()) + " coordinates, anisotropy has " +
                         std::to_string(a.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("non-finite coordinate in anisotropic distance");
}

// phi(t) and phi'(t) with the scaled terms (x_j / t^a_j)^2 to avoid overflow.
struct PhiEval {
    double value;
    double slope;
};

PhiEval phi(const AnisotropyVector& a, std::span<const double> x, double t) {
    double v = -1.0;
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] == 0.0) continue;
        const double r = std::abs(x[j]) / std::pow(t, a[j]);
        const double term = r * r;
        v += term;
        d -= 2.0 * a[j] * term / t;
    }
    return {v, d};
}

}  // namespace

DistanceBracket aniso_bracket(const AnisotropyVector& a, std::span<const double> x) {
    check_point(a, x);
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double r = std::pow(std::abs(x[j]), 1.0 / a[j]);
        lo = std::max(lo, r);
        hi += r;
    }
    return {lo, hi};
}

double aniso_residual(const AnisotropyVector& a, std::span<const double> x, double t) {
    check_point(a, x);
    return phi(a, x, t).value;
}

double aniso_distance(const AnisotropyVector& a, std::span<const double> x) {
    const auto [lo0, hi0] = aniso_bracket(a, x);
    if (hi0 == 0.0) return 0.0;
    if (lo0 == hi0) return lo0;  // a single nonzero coordinate

    constexpr double kTol = 1e-13;
    constexpr int kMaxIter = 100;

    double lo = lo0;
    double hi = hi0;
    double t = lo0;
    for (int it = 0; it < kMaxIter; ++it) {
        const auto [v, d] = phi(a, x, t);
        if (std::abs(v) <= kTol) return t;
        // phi is decreasing: keep the sign-consistent bracket current
        if (v > 0.0)
            lo = std::max(lo, t);
        else
            hi = std::min(hi, t);

        double next = (d != 0.0) ? t - v / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == t) return t;
        t = next;
    }
    return t;
}

AnisoPoint aniso_dilate(const AnisotropyVector& a, double t, std::span<const double> x) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("dilation parameter t must be positive");
    check_point(a, x);
    AnisoPoint y(x.begin(), x.end());
    for (std::size_t j = 0; j < y.size(); ++j) y[j] *= std::pow(t, a[j]);
    return y;
}

}  // namespace anisoft
