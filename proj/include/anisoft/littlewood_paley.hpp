#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"

#include <span>
#include <vector>

namespace anisoft {

/// Smooth radial cutoff: 1 on [0, inner], 0 on [outer, inf), monotone in between.
/// The transition is S(x) = h(1-x) / (h(1-x) + h(x)) with h(x) = exp(-1/x),
/// x = (r - inner) / (outer - inner).
struct BumpProfile {
    double inner_radius = 1.0;
    double outer_radius = 1.5;

    double operator()(double r) const noexcept;
};

/// psi(xi) = profile(|xi|_a) evaluated through the radius r = |xi|_a.
double lp_cutoff(double r) noexcept;

/// Phi_j(xi) as a function of r = |xi|_a:
/// Phi_0 = psi, Phi_j = psi(2^-j r) - psi(2^(1-j) r) for j >= 1.
double lp_symbol(int j, double r) noexcept;

/// Anisotropic Littlewood-Paley partition Phi_0..Phi_J pre-evaluated on the
/// frequency lattice of a grid. J is the largest level whose corona
/// {2^(J-1) < |xi|_a < 3 2^(J-1)} meets the lattice, so sum_j Phi_j = 1 on
/// every lattice frequency.
class DecompositionSystem {
public:
    /// Throws ConfigError if some axis' Nyquist frequency is below 2 in |.|_a units.
    DecompositionSystem(AnisotropyVector a, GridSpec spec);

    const AnisotropyVector& anisotropy() const noexcept { return a_; }
    const GridSpec& spec() const noexcept { return spec_; }
    int levels() const noexcept { return J_; }  // J

    /// Phi_j on the lattice, FFT order.
    std::span<const double> symbol(int j) const;
    /// |xi|_a on the lattice, FFT order.
    std::span<const double> radii() const noexcept { return radius_; }
    double max_radius() const noexcept { return r_max_; }

private:
    AnisotropyVector a_;
    GridSpec spec_;
    int J_ = 0;
    double r_max_ = 0.0;
    std::vector<double> radius_;
    std::vector<std::vector<double>> symbols_;
};

DecompositionSystem build_partition(const AnisotropyVector& a, const GridSpec& spec);

/// u_j = F^-1(Phi_j F u). Throws UsageError for j outside [0, J] or a grid mismatch.
GridFunction apply_block(const DecompositionSystem& sys, int j, const SpectralFunction& u);

/// Spectral energy fraction of u at |xi|_a > 2^(J-2).
double tail_fraction(const DecompositionSystem& sys, const SpectralFunction& u);

/// Largest tail fraction accepted by the quasi-norm evaluators.
inline constexpr double kTailTolerance = 1e-10;

/// Throws PreconditionError when tail_fraction exceeds kTailTolerance.
void certify_tail(const DecompositionSystem& sys, const SpectralFunction& u);

}  // namespace anisoft
