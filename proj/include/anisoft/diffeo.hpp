#pragma once

#include "anisoft/anisotropy.hpp"
#include "anisoft/grid.hpp"
#include "anisoft/jet.hpp"
#include "anisoft/spaces.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace anisoft {

/// structured: sigma(x) = (sigma'(x'), x_n). general: touches or reads x_n.
enum class DiffeoKind { identity, translation, structured, general, block };
std::string to_string(DiffeoKind kind);

/// Axis-wise support of a perturbation. On a bounded axis the map is the
/// identity outside [lo, hi]; unbounded axes are never read by the map.
struct SupportBox {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<bool> bounded;

    /// True when x lies strictly inside [lo, hi] on every bounded axis.
    bool contains(std::span<const double> x) const;
};

class DiffeoMap;

/// Smooth bijection of R^n that equals the identity outside a box, with
/// closed-form forward map and a closed-form or Newton inverse.
/// The radial profile used by the bump-based maps is
/// B(u) = exp(1 - 1/(1 - u)) for u < 1 and 0 otherwise, B(0) = 1.
class Diffeomorphism {
public:
    static Diffeomorphism identity(std::size_t n);
    /// x -> x + shift.
    static Diffeomorphism translation(std::vector<double> shift);
    /// x -> x + eps B(|x_S - c|^2 / w^2) v on the axes S (0-based). Throws
    /// DomainError unless |eps| max |grad B . v| <= 1/2, which keeps det J >= 1/2.
    static Diffeomorphism distortion(std::size_t n, std::vector<std::size_t> axes, std::vector<double> center,
                                     double width, double eps, std::vector<double> direction);
    /// x_t -> x_t + eps B(|x_S - c|^2 / w^2); det J = 1. t must not be in S.
    static Diffeomorphism shear(std::size_t n, std::size_t target, std::vector<std::size_t> sources,
                                std::vector<double> center, double width, double eps);
    /// Rotates (x_i, x_k) about c by angle * B(|(x_i, x_k) - c|^2 / w^2); det J = 1.
    static Diffeomorphism twist(std::size_t n, std::size_t i, std::size_t k, std::vector<double> center, double width,
                                double angle);
    /// sigma = factor_1 o ... o factor_m, factor i acting on blocks[i] only.
    /// Blocks must be consecutive runs of axes covering 0..n-1 in order.
    static Diffeomorphism block(std::vector<std::vector<std::size_t>> blocks, std::vector<Diffeomorphism> factors);

    DiffeoKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return n_; }
    const std::string& description() const noexcept { return description_; }
    /// Perturbation support; for blocks, the product of the factor supports.
    const SupportBox& support() const noexcept { return support_; }
    /// Axes whose coordinate may change / axes the map depends on.
    const std::vector<bool>& moved() const noexcept { return moved_; }
    const std::vector<bool>& read() const noexcept { return read_; }

    const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
    const std::vector<Diffeomorphism>& factors() const noexcept { return factors_; }

    AnisoPoint operator()(std::span<const double> x) const;
    AnisoPoint inverse(std::span<const double> y) const;
    /// Components of sigma as order-K jets around x.
    std::vector<Jet> jet(std::span<const double> x, int order) const;
    /// False when sigma(x) = x is guaranteed.
    bool moves(std::span<const double> x) const;

    /// tau = sigma^-1, with the same support.
    Diffeomorphism inverted() const;

private:
    Diffeomorphism() = default;

    std::shared_ptr<const DiffeoMap> map_;
    bool inverted_ = false;
    DiffeoKind kind_ = DiffeoKind::identity;
    std::size_t n_ = 0;
    std::string description_;
    SupportBox support_;
    std::vector<bool> moved_;
    std::vector<bool> read_;
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<Diffeomorphism> factors_;
};

/// Parses "identity", "translation:shift=a,b", "distortion:eps=..,width=..,center=..,axes=..,dir=..",
/// "shear:eps=..,target=..,sources=..", "twist:angle=..,axes=.." for an n-dimensional box of lengths L.
/// Omitted keys default to the box center, width L_min / 4 and small amplitudes.
/// Throws UsageError naming the offending key.
Diffeomorphism parse_diffeomorphism(const std::string& text, std::span<const double> box_lengths);

struct DiffeoConstants {
    std::vector<std::vector<int>> alphas;           // 1 <= |alpha| <= 4, graded order
    std::vector<std::vector<double>> component_sup;  // [j][alpha] sup |D^alpha sigma_j|
    std::vector<double> C_alpha;                    // max_j component_sup[j][alpha]
    double c_sigma = 1.0;                           // inf |det J sigma|
    double c_tau = 1.0;                             // inf |det J tau| = 1 / sup |det J sigma|
};

/// Sampled on a 32^n midpoint lattice over the support box ([-1, 1] on
/// unbounded axes); derivatives from order-4 jets. The identity outside the
/// support contributes det J = 1.
DiffeoConstants diffeo_constants(const Diffeomorphism& sigma);

/// Samples of f o sigma: the trigonometric interpolant of f evaluated at sigma(x)
/// wherever sigma moves x, the lattice samples elsewhere. Throws
/// PreconditionError unless every bounded support axis stays two spacings
/// away from the box faces.
GridFunction compose(const SpectralFunction& f, const Diffeomorphism& sigma);

/// sigma is structured (or the identity, or a translation fixing x_n) and
/// a_1 = ... = a_{n-1}, p_1 = ... = p_{n-1}; for block maps, p and a are
/// constant on every block.
bool invariance_hypotheses(const Diffeomorphism& sigma, const SpaceParams& params);

struct InvarianceRow {
    int f_id = 0;
    std::size_t param = 0;
    bool hypothesis_ok = false;
    double lhs = 0.0;   // f_norm(f o sigma)
    double rhs = 0.0;   // f_norm(f)
    double ratio = 0.0;
    double tail = 0.0;  // spectral tail of f o sigma, energy the lattice band cannot certify
};

struct InvarianceTable {
    std::vector<InvarianceRow> rows;  // ordered by (param, f_id)
    std::vector<RatioStats> bands;    // per parameter point
};

/// Ratios f_norm(f o sigma) / f_norm(f) for every family member and parameter
/// point. Hypothesis-violating points are run and flagged. Throws
/// PreconditionError when some f is not compactly supported two spacings
/// inside the box.
InvarianceTable invariance_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                      std::span<const SpaceParams> points);

struct BlockInvarianceReport {
    std::vector<RatioStats> factors;  // f o factor_i over the family
    RatioStats composite;
    double bound = 0.0;               // prod_i factors[i].max
    bool within_bound = false;        // composite.max <= 1.1 bound
};

/// Throws UsageError unless sigma is a block map, PreconditionError when p or
/// a is not constant on some block.
BlockInvarianceReport block_invariance_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                                  const SpaceParams& params);

struct LiftRouteReport {
    double r = 0.0;
    RatioStats direct;  // at s
    RatioStats lifted;  // h = Lambda_r^-1 f at s + r
    double min_deviation = 0.0;  // |lifted.min / direct.min - 1|
    double max_deviation = 0.0;
    bool consistent = false;     // both deviations <= 0.2
};

LiftRouteReport lift_route_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                      const SpaceParams& params, double r);

}  // namespace anisoft
