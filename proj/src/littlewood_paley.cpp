#include "anisoft/littlewood_paley.hpp"

#include "anisoft/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace anisoft {

namespace {

double h(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double BumpProfile::operator()(double r) const noexcept {
    if (r <= inner_radius) return 1.0;
    if (r >= outer_radius) return 0.0;
    const double x = (r - inner_radius) / (outer_radius - inner_radius);
    const double up = h(1.0 - x);
    return up / (up + h(x));
}

double lp_cutoff(double r) noexcept { return BumpProfile{}(r); }

double lp_symbol(int j, double r) noexcept {
    if (j == 0) return lp_cutoff(r);
    const double v = lp_cutoff(std::ldexp(r, -j)) - lp_cutoff(std::ldexp(r, 1 - j));
    return std::max(0.0, v);
}

DecompositionSystem::DecompositionSystem(AnisotropyVector a, GridSpec spec)
    : a_(std::move(a)), spec_(std::move(spec)) {
    const std::size_t n = spec_.dim();
    if (a_.size() != n)
        throw UsageError("anisotropy has " + std::to_string(a_.size()) + " weights, grid has " +
                         std::to_string(n) + " axes");

    double nyq_min = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
        const double nyq = std::numbers::pi * spec_.points(j) / spec_.length(j);
        nyq_min = std::min(nyq_min, std::pow(nyq, 1.0 / a_[j]));
    }
    if (!(nyq_min > 2.0)) {
        std::ostringstream msg;
        msg << "grid too coarse for a Littlewood-Paley partition: smallest axis Nyquist frequency is "
            << nyq_min << " in |.|_a units, need > 2; minimum points per axis:";
        for (std::size_t j = 0; j < n; ++j) {
            int need = static_cast<int>(std::floor(std::pow(2.0, a_[j]) * spec_.length(j) / std::numbers::pi)) + 1;
            need += need % 2;
            msg << ' ' << std::max(need, 8);
        }
        throw ConfigError(msg.str());
    }

    radius_.resize(spec_.size());
    std::vector<double> xi(n);
    for (std::size_t f = 0; f < spec_.size(); ++f) {
        spec_.frequency_at(f, xi);
        radius_[f] = aniso_distance(a_, xi);
        r_max_ = std::max(r_max_, radius_[f]);
    }
    // J = max{ j : 2^(j-1) < r_max }
    J_ = 0;
    while (std::ldexp(1.0, J_) < r_max_) ++J_;

    symbols_.assign(J_ + 1, std::vector<double>(spec_.size()));
    for (int j = 0; j <= J_; ++j)
        for (std::size_t f = 0; f < spec_.size(); ++f) symbols_[j][f] = lp_symbol(j, radius_[f]);
}

std::span<const double> DecompositionSystem::symbol(int j) const {
    if (j < 0 || j > J_)
        throw UsageError("level " + std::to_string(j) + " outside [0, " + std::to_string(J_) + "]");
    return symbols_[j];
}

DecompositionSystem build_partition(const AnisotropyVector& a, const GridSpec& spec) {
    return DecompositionSystem(a, spec);
}

GridFunction apply_block(const DecompositionSystem& sys, int j, const SpectralFunction& u) {
    if (!(u.spec() == sys.spec())) throw UsageError("spectral function and partition use different grids");
    const auto phi = sys.symbol(j);
    SpectralFunction v(u.spec(), std::vector<cplx>(u.coeffs().begin(), u.coeffs().end()));
    auto c = v.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f) c[f] *= phi[f];
    return fft_inverse(v);
}

double tail_fraction(const DecompositionSystem& sys, const SpectralFunction& u) {
    if (!(u.spec() == sys.spec())) throw UsageError("spectral function and partition use different grids");
    const double cut = std::ldexp(1.0, sys.levels() - 2);
    const auto r = sys.radii();
    const auto c = u.coeffs();
    double tail = 0.0, total = 0.0;
    for (std::size_t f = 0; f < c.size(); ++f) {
        const double e = std::norm(c[f]);
        total += e;
        if (r[f] > cut) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

void certify_tail(const DecompositionSystem& sys, const SpectralFunction& u) {
    const double frac = tail_fraction(sys, u);
    if (frac > kTailTolerance) {
        std::ostringstream msg;
        msg << "energy fraction " << frac << " above " << kTailTolerance << " at |xi|_a > 2^(J-2) = "
            << std::ldexp(1.0, sys.levels() - 2) << "; refine the grid (double points per axis) or smooth the input";
        throw PreconditionError("spectral tail negligible", msg.str());
    }
}

}  // namespace anisoft
