#pragma once

#include "anisoft/anisotropy.hpp"

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace anisoft {

using cplx = std::complex<double>;

/// Periodic rectangular lattice on [0, L_1) x ... x [0, L_n).
/// Storage is row-major with axis 1 (index 0) varying fastest.
class GridSpec {
public:
    GridSpec(std::vector<double> box_lengths, std::vector<int> points);

    /// Same box length and point count on every axis.
    static GridSpec cube(std::size_t n, double length, int points);

    std::size_t dim() const noexcept { return lengths_.size(); }
    std::size_t size() const noexcept { return total_; }

    double length(std::size_t axis) const { return lengths_[axis]; }
    int points(std::size_t axis) const { return points_[axis]; }
    double spacing(std::size_t axis) const { return lengths_[axis] / points_[axis]; }
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    std::span<const double> lengths() const noexcept { return lengths_; }
    std::span<const int> point_counts() const noexcept { return points_; }

    double cell_volume() const noexcept;
    double box_volume() const noexcept;

    /// Signed integer frequency k in [-N/2, N/2) stored at FFT-order index i.
    int wavenumber(std::size_t axis, int i) const noexcept {
        return i < points_[axis] / 2 ? i : i - points_[axis];
    }
    /// Angular frequency 2 pi k / L for FFT-order index i.
    double frequency(std::size_t axis, int i) const noexcept;
    double coordinate(std::size_t axis, int i) const noexcept { return i * spacing(axis); }

    /// Multi-index of a flat offset.
    void unravel(std::size_t flat, std::span<int> index) const noexcept;
    std::size_t ravel(std::span<const int> index) const noexcept;

    /// Frequency vector of a flat coefficient offset.
    void frequency_at(std::size_t flat, std::span<double> xi) const noexcept;
    /// Lattice point of a flat sample offset.
    void point_at(std::size_t flat, std::span<double> x) const noexcept;

    /// Same box, points multiplied by `factor` on every axis.
    GridSpec refined(int factor) const;

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.lengths_ == b.lengths_ && a.points_ == b.points_;
    }

private:
    std::vector<double> lengths_;
    std::vector<int> points_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

/// Complex samples of a periodic function on the lattice of a GridSpec.
class GridFunction {
public:
    explicit GridFunction(GridSpec spec);  // zero function
    GridFunction(GridSpec spec, std::vector<cplx> samples);

    /// Samples f(x) at every lattice point.
    static GridFunction from_function(const GridSpec& spec,
                                      const std::function<cplx(std::span<const double>)>& f);

    const GridSpec& spec() const noexcept { return spec_; }
    std::span<const cplx> samples() const noexcept { return samples_; }
    std::span<cplx> samples() noexcept { return samples_; }
    const cplx& operator[](std::size_t i) const { return samples_[i]; }
    cplx& operator[](std::size_t i) { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// max_x |u(x)|
    double max_abs() const noexcept;
    /// Pointwise moduli.
    std::vector<double> moduli() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator*=(cplx c);
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator*(cplx c, GridFunction a) { return a *= c; }

private:
    GridSpec spec_;
    std::vector<cplx> samples_;
};

/// Continuum-normalized Fourier coefficients:
/// coeff(k) = prod_j (L_j / N_j) * sum_x u(x) exp(-i xi_k . x), stored in FFT order.
class SpectralFunction {
public:
    explicit SpectralFunction(GridSpec spec);
    SpectralFunction(GridSpec spec, std::vector<cplx> coeffs);

    const GridSpec& spec() const noexcept { return spec_; }
    std::span<const cplx> coeffs() const noexcept { return coeffs_; }
    std::span<cplx> coeffs() noexcept { return coeffs_; }
    const cplx& operator[](std::size_t i) const { return coeffs_[i]; }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    /// Coefficient at signed wavenumbers k (each in [-N_j/2, N_j/2)).
    cplx at_wavenumber(std::span<const int> k) const;
    /// Flat offset of signed wavenumbers k.
    std::size_t offset_of(std::span<const int> k) const;

    /// Multiply every coefficient by symbol(xi).
    SpectralFunction& multiply(const std::function<cplx(std::span<const double>)>& symbol);

private:
    GridSpec spec_;
    std::vector<cplx> coeffs_;
};

SpectralFunction fft_forward(const GridFunction& u);
GridFunction fft_inverse(const SpectralFunction& u);

/// Evaluates the trigonometric interpolant sum_k coeff(k) e^{i xi_k . x} / prod L_j
/// at arbitrary points (coordinates are reduced modulo the periods).
std::vector<cplx> resample(const SpectralFunction& u, std::span<const AnisoPoint> points);

/// Trigonometric interpolant restricted to points that sit on the lattice along
/// every axis not flagged in `active`. The inactive axes are transformed back to
/// physical space once, so each evaluation costs prod_{active} N_j operations.
class PartialInterpolant {
public:
    PartialInterpolant(const SpectralFunction& u, std::vector<bool> active);

    const std::vector<bool>& active() const noexcept { return active_; }

    /// `x` supplies coordinates for the active axes; `lattice_index` supplies
    /// indices for the inactive ones (entries for active axes are ignored).
    /// Safe to call concurrently.
    cplx operator()(std::span<const double> x, std::span<const int> lattice_index) const;

private:
    GridSpec spec_;
    std::vector<bool> active_;
    std::vector<std::size_t> active_axes_;
    std::vector<std::size_t> inactive_axes_;
    std::size_t block_ = 1;       // prod_{active} N_j
    std::vector<cplx> blocks_;    // [inactive flat][active flat]
};

/// Spectral energy fraction carried by coefficients where `mask(xi)` is true.
double energy_fraction(const SpectralFunction& u,
                       const std::function<bool(std::span<const double>)>& mask);

/// Discrete L2 energy sum |u|^2 * cell volume.
double grid_energy(const GridFunction& u);
/// (2 pi)^-n * sum |coeff|^2 * prod (2 pi / L_j).
double spectral_energy(const SpectralFunction& u);

// Serialization: header line "n;N_1,...,N_n;L_1,...,L_n\n" followed by
// prod N_j pairs of little-endian IEEE-754 doubles (re, im), axis 1 fastest.
void write_grid(std::ostream& os, const GridFunction& u);
GridFunction read_grid(std::istream& is);
void write_grid_file(const std::filesystem::path& path, const GridFunction& u);
GridFunction read_grid_file(const std::filesystem::path& path);

/// CSV with columns x_1..x_n,re,im.
void write_grid_csv(std::ostream& os, const GridFunction& u);

}  // namespace anisoft
