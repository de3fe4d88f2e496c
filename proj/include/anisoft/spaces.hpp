#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/mixed_norms.hpp"
#include "anisoft/multipliers.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace anisoft {

struct SpaceParams {
    double s;
    AnisotropyVector a;
    IntegrabilityVector pq;
};

/// What to do when the input's spectral tail is not negligible.
enum class TailPolicy { enforce, report };

struct NormReport {
    double value = 0.0;
    /// ||2^(js) u_j | L_p|| for j = 0..J.
    std::vector<double> level_norms;
    /// Spectral energy fraction at |xi|_a > 2^(J-2).
    double tail = 0.0;
};

/// F^{s,a}_{p,q} quasi-norm || (sum_j 2^(jsq) |u_j|^q)^(1/q) | L_p ||.
/// Requires finite p. Under TailPolicy::enforce throws PreconditionError when
/// the tail is not certified.
NormReport f_norm_report(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
                         TailPolicy policy = TailPolicy::enforce);
double f_norm(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy = TailPolicy::enforce);
double f_norm(const GridFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy = TailPolicy::enforce);

/// B^{s,a}_{p,q} quasi-norm (sum_j 2^(jsq) ||u_j | L_p||^q)^(1/q); p = inf allowed.
NormReport b_norm_report(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
                         TailPolicy policy = TailPolicy::enforce);
double b_norm(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy = TailPolicy::enforce);
double b_norm(const GridFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy = TailPolicy::enforce);

/// ||Xi^s u | L_p|| with Xi^s the multiplier <xi>_a^s.
double h_norm(const SpectralFunction& u, double s, const AnisotropyVector& a, std::span<const double> p);
/// Same, after certifying the tail against `sys`.
double h_norm(const SpectralFunction& u, double s, const AnisotropyVector& a, std::span<const double> p,
              const DecompositionSystem& sys);

/// Hoelder norm sum_{|alpha|<=k} sup |D^alpha u| + sum_{|alpha|=k} sup |D^alpha u(x) - D^alpha u(y)| / |x-y|^(rho-k),
/// k < rho <= k+1. Derivatives are spectral; the difference quotient runs over
/// lattice pairs at periodic distance <= 1, deterministically subsampled to
/// 10^6 pairs when there are more.
double holder_norm(const GridFunction& u, double rho);

/// Aggregate of a ratio experiment. Entries with a vanishing denominator are skipped.
struct RatioStats {
    double min = 0.0;
    double max = 0.0;
    int count = 0;
    int skipped = 0;
    std::vector<double> ratios;  // per family member, NaN where skipped

    void add(double lhs, double rhs);
};

/// Ratios f_norm(sym(D) u; s - order) / f_norm(u; s) over a family.
RatioStats operator_ratio_experiment(std::span<const GridFunction> family, const MultiplierSymbol& sym,
                                     const SpaceParams& params, const DecompositionSystem& sys);

/// Ratios f_norm(D^alpha u; s - a.alpha) / f_norm(u; s).
RatioStats derivative_boundedness_experiment(std::span<const GridFunction> family, std::span<const int> alpha,
                                             const SpaceParams& params, const DecompositionSystem& sys);

/// x -> max over lattice y with periodic |x - y| < radius of |u(y)|.
GridFunction sup_over_ball(const GridFunction& u, double radius);

/// Ratios lp_vec_norm(sup_over_ball(u, 1)) / f_norm(u). Requires s > sum_l a_l / min(p_1..p_l).
RatioStats sup_ball_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                               const DecompositionSystem& sys);

/// Ratios b_norm(u; s, inf, inf) / holder_norm(u, rho) for s <= rho.
RatioStats holder_embedding_experiment(std::span<const GridFunction> family, double s, double rho,
                                       const DecompositionSystem& sys);

/// Ratios f_norm(u; lambda s, lambda a) / f_norm(u; s, a), each with its own partition.
RatioStats rescaling_experiment(std::span<const GridFunction> family, const SpaceParams& params, double lambda);

}  // namespace anisoft
