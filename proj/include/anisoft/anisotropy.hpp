#pragma once

#include <span>
#include <vector>

namespace anisoft {

/// Per-axis weights a_j >= 1 of a quasi-homogeneous dilation structure.
class AnisotropyVector {
public:
    /// Throws DomainError if empty, non-finite, or any weight is below 1.
    explicit AnisotropyVector(std::vector<double> weights);

    std::size_t size() const noexcept { return a_.size(); }
    double operator[](std::size_t j) const noexcept { return a_[j]; }
    std::span<const double> weights() const noexcept { return a_; }

    double min() const noexcept { return a_min_; }
    double sum() const noexcept { return a_sum_; }

    /// (1, a_1, ..., a_n), the weights of the inhomogeneous bracket.
    AnisotropyVector prepend_unit() const;

    /// (lambda a_1, ..., lambda a_n); lambda must keep every weight >= 1.
    AnisotropyVector scaled(double lambda) const;

    /// Dot product a . alpha.
    double dot(std::span<const int> alpha) const;

    friend bool operator==(const AnisotropyVector&, const AnisotropyVector&) = default;

private:
    std::vector<double> a_;
    double a_min_ = 0.0;
    double a_sum_ = 0.0;
};

using AnisoPoint = std::vector<double>;

/// |x|_a: the unique t > 0 with sum_j x_j^2 / t^(2 a_j) = 1, and 0 at the origin.
///
/// Newton iteration on the convex decreasing function
/// phi(t) = sum_j (x_j / t^a_j)^2 - 1, started from the lower bracket
/// max_j |x_j|^(1/a_j); falls back to bisection on
/// [max_j |x_j|^(1/a_j), sum_j |x_j|^(1/a_j)] if an iterate leaves the bracket.
double aniso_distance(const AnisotropyVector& a, std::span<const double> x);

/// The value phi(t) = sum_j (x_j / t^a_j)^2 - 1 that aniso_distance drives to zero.
double aniso_residual(const AnisotropyVector& a, std::span<const double> x, double t);

/// t^a x := (t^a_1 x_1, ..., t^a_n x_n). Throws DomainError for t <= 0.
AnisoPoint aniso_dilate(const AnisotropyVector& a, double t, std::span<const double> x);

/// Bracket [max_j |x_j|^(1/a_j), sum_j |x_j|^(1/a_j)] containing |x|_a.
struct DistanceBracket {
    double lower;
    double upper;
};
DistanceBracket aniso_bracket(const AnisotropyVector& a, std::span<const double> x);

}  // namespace anisoft
