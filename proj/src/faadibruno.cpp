#include "anisoft/faadibruno.hpp"

#include "anisoft/jet.hpp"
#include "anisoft/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace anisoft {

using boost::multiprecision::cpp_int;

int order(std::span<const int> alpha) {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
}

cpp_int factorial(std::span<const int> alpha) {
    cpp_int f = 1;
    for (int a : alpha)
        for (int k = 2; k <= a; ++k) f *= k;
    return f;
}

int PartitionTerm::degree() const {
    int d = 0;
    for (const auto& f : factors) d += f.count;
    return d;
}

std::string format_multi_index(std::span<const int> alpha) {
    std::string s = "(";
    for (std::size_t i = 0; i < alpha.size(); ++i) s += (i ? "," : "") + std::to_string(alpha[i]);
    return s + ")";
}

namespace {

// All multi-indices of length len with entries in [0, bound_l], descending lexicographic.
std::vector<MultiIndex> descending_box(std::span<const int> bound) {
    std::vector<MultiIndex> out;
    MultiIndex cur(bound.size());
    auto rec = [&](auto&& self, std::size_t l) -> void {
        if (l == bound.size()) {
            out.push_back(cur);
            return;
        }
        for (int v = bound[l]; v >= 0; --v) {
            cur[l] = v;
            self(self, l + 1);
        }
    };
    rec(rec, 0);
    return out;
}

Rational closed_form(const PartitionTerm& t, const MultiIndex& gamma) {
    cpp_int den = 1;
    for (const auto& f : t.factors) {
        const int c[1] = {f.count};
        den *= factorial(c);
        const cpp_int b = factorial(f.beta);
        for (int k = 0; k < f.count; ++k) den *= b;
    }
    return Rational(factorial(gamma), den);
}

class Enumerator {
public:
    Enumerator(const MultiIndex& gamma, std::size_t m) : gamma_(gamma), m_(m) {
        // Candidate betas: 1 <= |beta|, beta <= gamma; graded, then descending lexicographic.
        for (auto& b : descending_box(gamma))
            if (order(b) >= 1) candidates_.push_back(b);
        std::stable_sort(candidates_.begin(), candidates_.end(),
                         [](const MultiIndex& a, const MultiIndex& b) { return order(a) < order(b); });
    }

    std::vector<PartitionTerm> for_alpha(const MultiIndex& alpha) const {
        std::vector<PartitionTerm> out;
        PartitionTerm term;
        term.alpha = alpha;
        int pending = order(alpha);
        MultiIndex rest = gamma_;
        std::size_t j = 0;
        while (j < m_ && alpha[j] == 0) ++j;
        run(term, out, j, 0, alpha[j], pending, rest);
        return out;
    }

private:
    // Distributes `rest` over the factors still owed: `left` more betas for
    // component j (chosen from candidates at index >= start), then the later components.
    void run(PartitionTerm& term, std::vector<PartitionTerm>& out, std::size_t j, std::size_t start, int left,
             int pending, MultiIndex& rest) const {
        const int rest_order = order(rest);
        if (rest_order < pending) return;  // every remaining beta needs order >= 1
        if (pending == 0) {
            if (rest_order == 0) {
                term.coefficient = closed_form(term, gamma_);
                out.push_back(term);
            }
            return;
        }
        if (left == 0) {
            std::size_t next = j + 1;
            while (next < m_ && term.alpha[next] == 0) ++next;
            run(term, out, next, 0, term.alpha[next], pending, rest);
            return;
        }
        for (std::size_t c = start; c < candidates_.size(); ++c) {
            const MultiIndex& beta = candidates_[c];
            int kmax = left;
            for (std::size_t l = 0; l < beta.size(); ++l)
                if (beta[l] > 0) kmax = std::min(kmax, rest[l] / beta[l]);
            for (int k = 1; k <= kmax; ++k) {
                for (std::size_t l = 0; l < beta.size(); ++l) rest[l] -= beta[l];
                term.factors.push_back({j, beta, k});
                run(term, out, j, c + 1, left - k, pending - k, rest);
                term.factors.pop_back();
            }
            for (std::size_t l = 0; l < beta.size(); ++l) rest[l] += kmax * beta[l];
        }
    }

    MultiIndex gamma_;
    std::size_t m_;
    std::vector<MultiIndex> candidates_;
};

void check_gamma(const MultiIndex& gamma, std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw UsageError("dimensions n and m must be positive");
    if (gamma.size() != n) throw UsageError("gamma must have n entries");
    for (int g : gamma)
        if (g < 0) throw UsageError("gamma entries must be nonnegative");
    if (order(gamma) == 0) throw DomainError("the chain-rule expansion needs |gamma| >= 1");
}

}  // namespace

ChainRuleExpansion enumerate_terms(const MultiIndex& gamma, std::size_t n, std::size_t m) {
    check_gamma(gamma, n, m);
    const int k = order(gamma);
    std::vector<MultiIndex> alphas;
    for (auto& a : descending_box(std::vector<int>(m, k)))
        if (order(a) >= 1 && order(a) <= k) alphas.push_back(a);
    const Enumerator en(gamma, m);
    std::vector<std::vector<PartitionTerm>> parts(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) { parts[i] = en.for_alpha(alphas[i]); });
    ChainRuleExpansion exp{gamma, n, m, {}};
    for (auto& p : parts)
        for (auto& t : p) exp.terms.push_back(std::move(t));
    return exp;
}

std::size_t term_count(const MultiIndex& gamma, std::size_t n, std::size_t m) {
    return enumerate_terms(gamma, n, m).terms.size();
}

bool satisfies_constraints(const PartitionTerm& term, const MultiIndex& gamma, std::size_t n, std::size_t m) {
    if (term.alpha.size() != m) return false;
    const int k = order(gamma);
    std::vector<int> per_j(m, 0);
    MultiIndex total(n, 0);
    for (const auto& f : term.factors) {
        if (f.j >= m || f.beta.size() != n || f.count < 1) return false;
        const int b = order(f.beta);
        if (b < 1 || b > k) return false;
        per_j[f.j] += f.count;
        for (std::size_t l = 0; l < n; ++l) total[l] += f.count * f.beta[l];
    }
    for (std::size_t j = 0; j < m; ++j)
        if (per_j[j] != term.alpha[j]) return false;
    if (total != gamma) return false;
    if (term.degree() != order(term.alpha)) return false;
    return term.coefficient > 0 && term.coefficient == closed_form(term, gamma);
}

std::string to_string(const PartitionTerm& term) {
    std::ostringstream os;
    os << term.coefficient << " * D^" << format_multi_index(term.alpha) << " g";
    for (const auto& f : term.factors) {
        os << " * ";
        if (f.count > 1) os << "(";
        os << "D^" << format_multi_index(f.beta) << " f" << f.j + 1;
        if (f.count > 1) os << ")^" << f.count;
    }
    return os.str();
}

namespace {

// The suite's composites, written once for double and Jet arguments.
template <class T>
void suite_f(std::size_t id, std::span<const T> x, std::vector<T>& y) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (id) {
        case 0: y = {x[0] * x[0] * x[0] - 2.0 * x[0] + 1.0}; break;
        case 1: y = {x[0] * x[0] * x[1] + 0.5 * x[1]}; break;
        case 2: y = {x[0] * x[0], exp(0.3 * x[0])}; break;
        case 3: y = {x[0] * x[1], x[0] - x[1] * x[1]}; break;
        case 4: y = {x[0] * x[1] * x[2] + x[0] * x[0]}; break;
        case 5: y = {x[0] + x[1] * x[1], x[1] * x[2], exp(0.2 * x[0])}; break;
        case 6: y = {x[0] * x[0], x[0] * x[1], x[1] * x[1] * x[1]}; break;
        case 7: y = {sin(x[0]) + x[1], x[2] * x[2] - x[0]}; break;
        case 8: y = {x[0], x[0] * x[0], x[0] * x[0] * x[0]}; break;
        default: y = {2.0 * x[0] - x[1], 0.5 * x[0] + 1.5 * x[1]}; break;
    }
}

template <class T>
T suite_g(std::size_t id, std::span<const T> y) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (id) {
        case 0: return exp(y[0]);
        case 1: return sin(y[0]);
        case 2: return y[0] * y[1] * y[1];
        case 3: return exp(0.5 * y[0]) * cos(y[1]);
        case 4: return exp(-y[0]);
        case 5: return y[0] * y[1] + sin(y[2]);
        case 6: return exp(0.2 * (y[0] + y[1] + y[2]));
        case 7: return y[0] * y[0] * y[0] + y[0] * y[1];
        case 8: return cos(y[0]) + y[1] * y[2];
        default: return exp(y[0] - 0.5 * y[1]);
    }
}

long double composite(std::size_t id, std::span<const long double> x) {
    std::vector<long double> y;
    suite_f<long double>(id, x, y);
    return suite_g<long double>(id, y);
}

// Central difference of order gamma with step h: tensor product of
// sum_i (-1)^i C(k, i) F(x + (k/2 - i) h) / h^k.
double central_difference(std::size_t id, std::span<const double> x0, const MultiIndex& gamma, double h) {
    const std::size_t n = gamma.size();
    std::vector<int> idx(n, 0);
    std::vector<long double> x(n);
    long double total = 0.0L;
    for (;;) {
        long double w = 1.0L;
        for (std::size_t l = 0; l < n; ++l) {
            const int k = gamma[l], i = idx[l];
            long double binom = 1.0L;
            for (int t = 0; t < i; ++t) binom = binom * (k - t) / (t + 1);
            w *= (i % 2 ? -1.0L : 1.0L) * binom / std::pow(static_cast<long double>(h), k);
            x[l] = x0[l] + (0.5L * k - i) * static_cast<long double>(h);
        }
        total += w * composite(id, x);
        std::size_t l = 0;
        while (l < n && ++idx[l] > gamma[l]) idx[l++] = 0;
        if (l == n) break;
    }
    return static_cast<double>(total);
}

}  // namespace

std::vector<ChainRulePair> chain_rule_suite() {
    return {
        {"cubic into exp", 1, 1, {0.4}},
        {"quadratic into sin", 2, 1, {0.3, -0.5}},
        {"curve into monomial", 1, 2, {0.7}},
        {"bilinear into exp cos", 2, 2, {0.2, 0.6}},
        {"cubic form into exp", 3, 1, {0.5, -0.3, 0.8}},
        {"mixed map into sum", 3, 3, {0.1, 0.4, -0.6}},
        {"quadratic map into exp", 2, 3, {0.6, -0.4}},
        {"trig map into cubic", 3, 2, {0.3, 0.2, -0.7}},
        {"moment curve into trig", 1, 3, {0.5}},
        {"linear map into exp", 2, 2, {0.3, 0.1}},
    };
}

std::vector<SuiteCheck> verify_suite(int max_order, double h) {
    const auto suite = chain_rule_suite();
    std::vector<SuiteCheck> out;
    for (std::size_t id = 0; id < suite.size(); ++id) {
        const auto& pair = suite[id];
        const std::size_t n = pair.n, m = pair.m;
        // Derivative oracles from order-max_order jets of f at x0 and of g at f(x0).
        auto fs = JetSpace::get(n, max_order);
        std::vector<Jet> xj;
        for (std::size_t l = 0; l < n; ++l) xj.push_back(Jet::variable(fs, l, pair.x0[l]));
        std::vector<Jet> fj;
        suite_f<Jet>(id, xj, fj);
        auto gs = JetSpace::get(m, max_order);
        std::vector<Jet> yj;
        for (std::size_t j = 0; j < m; ++j) yj.push_back(Jet::variable(gs, j, fj[j].value()));
        const Jet gj = suite_g<Jet>(id, yj);
        const FDerivatives<double> fd = [&](std::size_t j, std::span<const int> beta) -> std::optional<double> {
            if (order(beta) > max_order) return std::nullopt;
            return fj[j].derivative(beta);
        };
        const GDerivatives<double> gd = [&](std::span<const int> alpha) -> std::optional<double> {
            if (order(alpha) > max_order) return std::nullopt;
            return gj.derivative(alpha);
        };
        for (int k = 1; k <= max_order; ++k) {
            const std::size_t first = out.size();
            double scale = 0.0;
            for (auto& gamma : descending_box(std::vector<int>(n, k))) {
                if (order(gamma) != k) continue;
                SuiteCheck c;
                c.pair = id;
                c.gamma = gamma;
                c.formula = evaluate(enumerate_terms(gamma, n, m), fd, gd);
                const double d1 = central_difference(id, pair.x0, gamma, h);
                const double d2 = central_difference(id, pair.x0, gamma, 0.5 * h);
                c.difference = (4.0 * d2 - d1) / 3.0;
                scale = std::max(scale, std::abs(c.formula));
                out.push_back(c);
            }
            const double floor = std::max(1e-3 * scale, 1e-300);
            for (std::size_t i = first; i < out.size(); ++i)
                out[i].relative_error =
                    std::abs(out[i].formula - out[i].difference) / std::max(std::abs(out[i].formula), floor);
        }
    }
    return out;
}

}  // namespace anisoft
