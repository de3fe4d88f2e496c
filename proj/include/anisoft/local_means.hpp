#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"
#include "anisoft/mixed_norms.hpp"
#include "anisoft/spaces.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace anisoft {

// One-dimensional mollifier b(x) = exp(-1/(1-x^2)) / c on (-1, 1), c chosen so that
// the integral is 1.

double bump(double x);
/// m-th derivative of the normalized bump.
double bump_derivative(int m, double x);
/// Continuous Fourier transform int b(x) e^{-i x eta} dx (real and even), by
/// trapezoidal quadrature on 2048 nodes.
double bump_hat(double eta);

/// bump_hat tabulated on [0, eta_max] with step 1/64 and evaluated by cubic
/// Hermite interpolation; falls back to bump_hat beyond eta_max.
class BumpTransform {
public:
    explicit BumpTransform(double eta_max);
    double operator()(double eta) const;
    double eta_max() const noexcept { return eta_max_; }

private:
    double eta_max_;
    double step_;
    std::vector<double> value_;
    std::vector<double> slope_;
};

struct TauberianConstants {
    double epsilon;
    double delta;
};

/// Local-means kernels on R^n. The base bump is the tensor product
/// k^0(x) = prod_l b(x_l / w) / w with half-width w = radius / sqrt(n), so its
/// support cube lies in the Euclidean ball of the given radius; k_0 = k^0 and
/// k = Delta^N k^0.
class KernelPair {
public:
    int N() const noexcept { return N_; }
    double support_radius() const noexcept { return radius_; }
    double half_width() const noexcept { return w_; }
    int moment_order() const noexcept { return 2 * N_ - 1; }
    std::size_t dim() const noexcept { return n_; }

    /// Samples on the construction grid, centered at the origin (periodic wrap).
    const GridFunction& k0() const noexcept { return k0_; }
    const GridFunction& k() const noexcept { return k_; }

    /// Analytic values.
    double k0_value(std::span<const double> x) const;
    double k_value(std::span<const double> x) const;

    /// Continuous Fourier transforms: k0_hat = prod_l bump_hat(w eta_l),
    /// k_hat = (-|eta|^2)^N k0_hat.
    double k0_hat(std::span<const double> eta) const;
    double k_hat(std::span<const double> eta) const;

    // Certification record.
    double integral_k0 = 0.0;      // int k_0
    double integral_base = 0.0;    // int k^0
    double moment_residual = 0.0;  // max_{|alpha| <= 2N-1} |int x^alpha k|
    double spectral_identity_error = 0.0;
    double outside_support_max = 0.0;  // max |sample| outside the support ball
    TauberianConstants tauberian{};

private:
    friend KernelPair build_kernels(int N, double radius, const AnisotropyVector& a, const GridSpec& spec);
    KernelPair(int N, double radius, std::size_t n, GridSpec spec);

    int N_;
    double radius_;
    std::size_t n_;
    double w_;
    GridFunction k0_;
    GridFunction k_;
    // Terms of Delta^N = sum_m c_m prod_l d^(2 m_l) / dx_l^(2 m_l).
    std::vector<std::vector<int>> terms_;
    std::vector<double> term_weights_;
};

/// Builds and certifies a kernel pair. Throws ConfigError when the grid has
/// fewer than 16 points across the support diameter on some axis, or when a
/// certification (moments <= 1e-8, spectral identity <= 1e-10, vanishing
/// outside the support, Tauberian floors) fails.
KernelPair build_kernels(int N, double radius, const AnisotropyVector& a, const GridSpec& spec);

/// Spectrum of k_j * u: j = 0 uses k_0, j >= 1 the dilate k_j(x) = 2^(j|a|) k(2^(ja) x),
/// realized as the symbol k^(2^(-ja) xi).
SpectralFunction kernel_level_spectrum(const KernelPair& kp, const AnisotropyVector& a, int j,
                                       const SpectralFunction& u);

struct LocalMeansOptions {
    /// Levels stop once two consecutive weighted level norms fall below
    /// tolerance times the largest one seen, past the grid's top level.
    double tolerance = 1e-13;
    int max_levels = 200;
    TailPolicy policy = TailPolicy::enforce;
    /// Partition used for the tail check and the level count; built on demand when null.
    const DecompositionSystem* sys = nullptr;
};

struct LocalMeansReport {
    double value = 0.0;
    double base_term = 0.0;              // ||k_0 * u | L_p||
    double sequence_term = 0.0;          // ||{2^(sj) k_j * u}_{j>=1} | L_p(l_q)||
    std::vector<double> level_norms;     // ||2^(sj) k_j * u | L_p||, j >= 0 (j = 0 unweighted)
    double tail = 0.0;
};

/// ||k_0 * u | L_p|| + ||{2^(sj) k_j * u}_{j>=1} | L_p(l_q)||.
/// Throws PreconditionError unless s < 2 N a_min, or (under enforce) when the tail is not certified.
LocalMeansReport local_means_report(const SpectralFunction& u, const SpaceParams& params, const KernelPair& kp,
                                    const LocalMeansOptions& opt = {});
double local_means_norm(const GridFunction& u, const SpaceParams& params, const KernelPair& kp,
                        const LocalMeansOptions& opt = {});

/// Peetre exponents r_l > 0.
struct MaximalParams {
    std::vector<double> r;
};

/// psi_j^* F(x) = max over lattice y of |F(y)| / prod_l (1 + 2^(j a_l) |x_l - y_l|)^(r_l),
/// |x_l - y_l| the periodic distance. Separable max-convolution, axis 1 first;
/// each candidate is formed as ((|F| / w_1) / w_2) / ... .
GridFunction peetre_maximal(const GridFunction& conv, int j, const MaximalParams& mp, const AnisotropyVector& a);
/// Same, applied to F = F^-1(symbol * u^).
GridFunction peetre_maximal(const SpectralFunction& u, int j, const std::function<double(std::span<const double>)>& symbol,
                            const MaximalParams& mp, const AnisotropyVector& a);

/// Finite surrogate of the parameter set: 8 deterministic invertible maps on the
/// first n-1 variables, stored row-major (m x m, m = n-1).
struct ThetaSet {
    std::size_t m = 0;
    std::vector<std::vector<double>> maps;
    double min_abs_det = 0.0;  // c
    double max_entry = 0.0;    // C
};
ThetaSet default_theta_set(std::size_t n);

/// Symbol of psi_{theta,j}: |det A|^-1 psi^(A^-T eta', eta_n) with eta = 2^(-ja) xi,
/// where psi is k_0 (j = 0) or k (j >= 1) of the pair.
class ThetaKernelSymbol {
public:
    ThetaKernelSymbol(const KernelPair& kp, const AnisotropyVector& a, std::span<const double> map,
                      std::shared_ptr<const BumpTransform> table);
    double operator()(int j, std::span<const double> xi) const;
    /// Largest |argument| handed to bump_hat for frequencies on `spec`.
    double max_argument(const GridSpec& spec) const;

private:
    const KernelPair* kp_;
    AnisotropyVector a_;
    std::size_t m_;
    std::vector<double> inv_t_;  // A^-T, row-major
    double inv_det_;
    std::shared_ptr<const BumpTransform> table_;
};

struct MaximalRow {
    int id = 0;
    double thm31_lhs = 0.0, thm31_rhs = 0.0;  // sup_theta psi_theta^* side vs phi^* side
    double thm32_lhs = 0.0, thm32_rhs = 0.0;  // psi^* side vs psi_j * f side
    long domination_violations = 0;
    int levels = 0;
};

struct MaximalReport {
    std::vector<MaximalRow> rows;
    RatioStats thm31;
    RatioStats thm32;
    long domination_violations = 0;
    ThetaSet theta;
};

/// Runs both maximal inequalities over a family. psi is the kernel pair under
/// test, phi the comparison pair. Throws PreconditionError unless
/// s < 2 N_psi a_min and 1/r_l < min(q, p_1..p_n) for every l.
MaximalReport maximal_inequality_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                                            const MaximalParams& mp, const KernelPair& psi, const KernelPair& phi,
                                            const ThetaSet& theta, double tolerance = 1e-8);

/// Ratios local_means_norm / f_norm over a family.
RatioStats local_means_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                                  const KernelPair& kp, const DecompositionSystem& sys);

/// Axis-aligned box [lo_l, hi_l).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    bool contains(std::span<const double> x) const;
    /// Euclidean distance from the box `inner` to the complement of this box.
    double margin_to(const Box& inner) const;
};

/// Bounding box of the lattice points where |f| > 1e-15 max |f|.
Box numerical_support(const GridFunction& f);

struct InfimumReport {
    bool all_increase = false;
    double min_gap = 0.0;
    double base_norm = 0.0;
    std::vector<double> gaps;
};

/// For f supported inside U with margin > 2 * support_radius, checks that
/// every perturbation g (each vanishing on U) strictly increases the local-means
/// norm. Throws PreconditionError on a margin violation or if some g does not
/// vanish on U.
InfimumReport attained_infimum_experiment(const GridFunction& f, const Box& U, std::span<const GridFunction> perturbations,
                                          const KernelPair& kp, const SpaceParams& params,
                                          const LocalMeansOptions& opt = {});

}  // namespace anisoft
