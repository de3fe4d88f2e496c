#pragma once

#include "anisoft/grid.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace anisoft {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exponents p_1..p_n and q in (0, inf].
class IntegrabilityVector {
public:
    IntegrabilityVector(std::vector<double> p, double q);

    std::span<const double> p() const noexcept { return p_; }
    double p(std::size_t j) const noexcept { return p_[j]; }
    double q() const noexcept { return q_; }
    std::size_t size() const noexcept { return p_.size(); }
    /// min(1, p_1, ..., p_n, q)
    double d() const noexcept { return d_; }
    /// min(p_1, ..., p_n)
    double p_min() const noexcept;

private:
    std::vector<double> p_;
    double q_;
    double d_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = s_ + x;
        c_ += std::abs(s_) >= std::abs(x) ? (s_ - t) + x : (x - t) + s_;
        s_ = t;
    }
    double value() const noexcept { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// Iterated norm of nonnegative lattice data: Riemann sums over axis 1 first,
/// lattice max where p_j = inf.
double lp_vec_norm(std::span<const double> values, const GridSpec& spec, std::span<const double> p);

/// ||u | L_p|| with the iterated order innermost in x_1.
double lp_vec_norm(const GridFunction& u, std::span<const double> p);

/// || (sum_k |w_k u_k|^q)^(1/q) | L_p || (pointwise max for q = inf).
/// Throws UsageError on grid mismatch or unequal lengths.
double lp_lq_norm(std::span<const GridFunction> us, std::span<const double> weights,
                  const IntegrabilityVector& pq);

/// Pointwise weighted l_q aggregate of |u_k|, before the mixed norm.
std::vector<double> lq_aggregate(std::span<const GridFunction> us, std::span<const double> weights, double q);

}  // namespace anisoft
