#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace anisoft {

enum class SymbolKind { lambda_r, xi_t, axis_power, custom };

/// A Fourier multiplier symbol xi -> lambda(xi) together with its growth order
/// (the exponent r in |lambda(xi)| <~ <xi>_a^r).
class MultiplierSymbol {
public:
    using Fn = std::function<cplx(std::span<const double>)>;

    MultiplierSymbol(SymbolKind kind, Fn fn, double order, std::string description);

    cplx operator()(std::span<const double> xi) const { return fn_(xi); }
    SymbolKind kind() const noexcept { return kind_; }
    double order() const noexcept { return order_; }
    const std::string& description() const noexcept { return description_; }

    /// 1 / lambda, of order -order().
    MultiplierSymbol reciprocal() const;

private:
    SymbolKind kind_;
    Fn fn_;
    double order_;
    std::string description_;
};

/// lambda_r(xi) = sum_k (1 + xi_k^2)^(r / (2 a_k)).
MultiplierSymbol lambda_symbol(const AnisotropyVector& a, double r);
/// <xi>_a^t with <xi>_a = |(1, xi)|_(1, a).
MultiplierSymbol xi_symbol(const AnisotropyVector& a, double t);
/// (1 + xi_k^2)^mu for the 1-based axis k. Throws UsageError if k is out of range.
MultiplierSymbol axis_power_symbol(const AnisotropyVector& a, int k, double mu);
/// (i xi)^alpha, the symbol of D^alpha.
MultiplierSymbol derivative_symbol(const AnisotropyVector& a, std::span<const int> alpha);
MultiplierSymbol custom_symbol(MultiplierSymbol::Fn fn, double order, std::string description);
/// Pointwise product; orders add.
MultiplierSymbol product(const MultiplierSymbol& lhs, const MultiplierSymbol& rhs);

/// lambda(xi) u^(xi) without the inverse transform. Throws DomainError on a
/// non-finite symbol value.
SpectralFunction multiply_spectrum(const MultiplierSymbol& sym, const SpectralFunction& u);
/// lambda(D) u = F^-1(lambda u^).
GridFunction apply_multiplier(const MultiplierSymbol& sym, const SpectralFunction& u);

/// Lambda_r followed by the exact inverse 1/lambda_r.
GridFunction lift_roundtrip(const AnisotropyVector& a, double r, const SpectralFunction& u);

/// sup over j in [0, J] and 1/4 <= |xi|_a <= 4 of 2^(-j(r - a.alpha)) |D^alpha lambda(2^(ja) xi)|,
/// where r = sym.order(). Derivatives by central differences with one Richardson step.
double symbol_seminorm(const MultiplierSymbol& sym, const AnisotropyVector& a, std::span<const int> alpha, int J);

struct SeminormEntry {
    std::vector<int> alpha;
    double value;
};
/// symbol_seminorm for every alpha with |alpha| <= max_order, graded lexicographic order.
std::vector<SeminormEntry> seminorm_scan(const MultiplierSymbol& sym, const AnisotropyVector& a, int max_order,
                                         int J);

/// Deterministic corona sample {rho^a omega}: 10 radii geometric in [1/4, 4]
/// times 100 directions (uniform angles in 2-D, seeded Gaussian directions above).
std::vector<AnisoPoint> corona_samples(const AnisotropyVector& a);

/// Central-difference estimate of D^alpha f at xi with step h, Richardson-extrapolated once.
double finite_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> xi,
                         std::span<const int> alpha, double h);

}  // namespace anisoft
