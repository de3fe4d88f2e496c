#pragma once

#include "anisoft/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace anisoft {

using Rational = boost::multiprecision::cpp_rational;
using MultiIndex = std::vector<int>;

int order(std::span<const int> alpha);
/// alpha! = prod_l alpha_l!, exact.
boost::multiprecision::cpp_int factorial(std::span<const int> alpha);

/// One summand of the multivariate chain rule for d^gamma (g o f):
/// coefficient * d^alpha g(f(x0)) * prod_(j, beta) (d^beta f_j(x0))^count.
struct PartitionTerm {
    struct Factor {
        std::size_t j;  // component of f, 0-based
        MultiIndex beta;
        int count;
    };

    MultiIndex alpha;              // length m
    std::vector<Factor> factors;   // grouped by j, betas in canonical order
    Rational coefficient;          // gamma! / prod (count! (beta!)^count)

    /// Total polynomial degree in the derivatives of f.
    int degree() const;
};

struct ChainRuleExpansion {
    MultiIndex gamma;
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<PartitionTerm> terms;
};

/// All terms with 1 <= |alpha| <= |gamma|, alpha in descending lexicographic
/// order, each assignment listed once. Throws DomainError when |gamma| = 0 and
/// UsageError on a length mismatch or a negative entry.
ChainRuleExpansion enumerate_terms(const MultiIndex& gamma, std::size_t n, std::size_t m);
std::size_t term_count(const MultiIndex& gamma, std::size_t n, std::size_t m);

/// Re-checks alpha_j = sum_beta count for every j, sum count * beta = gamma,
/// 1 <= |beta| <= |gamma|, and coefficient > 0 and equal to its closed form.
bool satisfies_constraints(const PartitionTerm& term, const MultiIndex& gamma, std::size_t n, std::size_t m);

/// Derivative oracles: d^beta f_j(x0) and d^alpha g(f(x0)). Returning nullopt
/// means the oracle cannot supply that derivative.
template <class T>
using FDerivatives = std::function<std::optional<T>(std::size_t j, std::span<const int> beta)>;
template <class T>
using GDerivatives = std::function<std::optional<T>(std::span<const int> alpha)>;

std::string format_multi_index(std::span<const int> alpha);

/// sum over terms of coefficient * g-derivative * prod f-derivative^count. Exact
/// for T = Rational. Throws UsageError naming (j, beta) or alpha when an oracle
/// has no value.
template <class T>
T evaluate(const ChainRuleExpansion& exp, const FDerivatives<T>& f, const GDerivatives<T>& g) {
    T total = 0;
    for (const auto& term : exp.terms) {
        const auto ga = g(term.alpha);
        if (!ga) throw UsageError("g oracle has no derivative alpha = " + format_multi_index(term.alpha));
        T prod = *ga;
        for (const auto& fac : term.factors) {
            const auto fb = f(fac.j, fac.beta);
            if (!fb)
                throw UsageError("f oracle has no derivative (j, beta) = (" + std::to_string(fac.j + 1) + ", " +
                                 format_multi_index(fac.beta) + ")");
            for (int k = 0; k < fac.count; ++k) prod *= *fb;
        }
        if constexpr (std::is_same_v<T, Rational>) total += term.coefficient * prod;
        else total += static_cast<T>(term.coefficient) * prod;
    }
    return total;
}

/// "3 * g^(2) * (f1^(1))^2 * f1^(2)" style line for one term.
std::string to_string(const PartitionTerm& term);

/// One composite of the fixed finite-difference suite.
struct ChainRulePair {
    std::string name;
    std::size_t n = 0, m = 0;
    std::vector<double> x0;
};
std::vector<ChainRulePair> chain_rule_suite();

struct SuiteCheck {
    std::size_t pair = 0;
    MultiIndex gamma;
    double formula = 0.0;      // evaluate() with jet-derived oracles
    double difference = 0.0;   // central differences, one Richardson step
    /// |formula - difference| / max(|formula|, 1e-3 * largest |formula| of the
    /// same pair and order); entries that vanish exactly are measured
    /// against their order's scale.
    double relative_error = 0.0;
};

/// Every |gamma| in [1, max_order] for every pair of the suite, step h.
std::vector<SuiteCheck> verify_suite(int max_order = 4, double h = 1e-2);

}  // namespace anisoft
