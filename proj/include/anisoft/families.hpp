#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"
#include "anisoft/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace anisoft {

/// Test-function families. Every member is defined independently of the grid
/// resolution (only the box enters), so the same seed yields the same function
/// on a grid and on its refinement.
enum class FamilyKind { gaussians, modes, random_band_limited };

struct FamilyDescriptor {
    FamilyKind kind = FamilyKind::random_band_limited;
    int count = 1;

    /// "gaussians:K", "modes:K" or "random-band-limited:K". Throws UsageError.
    static FamilyDescriptor parse(const std::string& text);
    std::string to_string() const;
};

/// Real trigonometric polynomial sum_k c_k e^{i xi_k . x} with Hermitian
/// normally distributed c_k on the frequencies |xi_k|_a <= radius.
/// Coefficients are drawn in lexicographic wavenumber order over the box
/// |k_j| <= radius^a_j L_j / (2 pi). Throws ConfigError if the grid cannot hold them.
GridFunction random_band_limited(const GridSpec& spec, const AnisotropyVector& a, double radius, Rng& rng);

/// Parameters of an axis-aligned Gaussian amp * exp(-sum ((x_j - c_j) / w_j)^2).
struct Gaussian {
    double amplitude = 1.0;
    std::vector<double> center;
    std::vector<double> width;

    double operator()(std::span<const double> x) const;
    GridFunction sample(const GridSpec& spec) const;
};

/// Random Gaussian with center in [0.42, 0.58] * L_j and widths in
/// [w_lo, w_hi] * L_j. With the default widths the samples fall below 1e-15 of
/// the peak well before the box faces, so the members count as compactly supported.
Gaussian random_gaussian(const GridSpec& spec, Rng& rng, double w_lo = 0.04, double w_hi = 0.064);

/// Real sum of `terms` cosines with random wavenumbers inside |xi|_a <= radius.
GridFunction random_modes(const GridSpec& spec, const AnisotropyVector& a, double radius, int terms, Rng& rng);

/// Members of a family; member i uses the seed stream seed + i.
std::vector<GridFunction> make_family(const FamilyDescriptor& fam, const GridSpec& spec, const AnisotropyVector& a,
                                      double band_radius, std::uint64_t seed);

}  // namespace anisoft
