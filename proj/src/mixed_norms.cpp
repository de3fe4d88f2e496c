#include "anisoft/mixed_norms.hpp"

#include "anisoft/errors.hpp"

#include <algorithm>
#include <cmath>

namespace anisoft {

namespace {

bool valid_exponent(double v) { return v > 0.0 && !std::isnan(v); }

}  // namespace

IntegrabilityVector::IntegrabilityVector(std::vector<double> p, double q) : p_(std::move(p)), q_(q) {
    if (p_.empty()) throw DomainError("integrability vector needs at least one p");
    for (std::size_t j = 0; j < p_.size(); ++j)
        if (!valid_exponent(p_[j]))
            throw DomainError("p_" + std::to_string(j + 1) + " must lie in (0, inf]");
    if (!valid_exponent(q_)) throw DomainError("q must lie in (0, inf]");
    d_ = std::min({1.0, q_, *std::min_element(p_.begin(), p_.end())});
}

double IntegrabilityVector::p_min() const noexcept { return *std::min_element(p_.begin(), p_.end()); }

double lp_vec_norm(std::span<const double> values, const GridSpec& spec, std::span<const double> p) {
    if (values.size() != spec.size()) throw UsageError("value count does not match grid");
    if (p.size() != spec.dim())
        throw UsageError("p has " + std::to_string(p.size()) + " entries, grid has " + std::to_string(spec.dim()) +
                         " axes");
    for (double v : p)
        if (!valid_exponent(v)) throw DomainError("exponent p must lie in (0, inf]");

    std::vector<double> cur(values.begin(), values.end());
    for (std::size_t axis = 0; axis < spec.dim(); ++axis) {
        const std::size_t len = static_cast<std::size_t>(spec.points(axis));
        const std::size_t outer = cur.size() / len;
        const double h = spec.spacing(axis);
        const double pj = p[axis];
        std::vector<double> next(outer);
        for (std::size_t o = 0; o < outer; ++o) {
            const double* row = cur.data() + o * len;
            if (std::isinf(pj)) {
                double m = 0.0;
                for (std::size_t i = 0; i < len; ++i) m = std::max(m, row[i]);
                next[o] = m;
            } else {
                CompensatedSum s;
                if (pj == 1.0)
                    for (std::size_t i = 0; i < len; ++i) s.add(row[i]);
                else if (pj == 2.0)
                    for (std::size_t i = 0; i < len; ++i) s.add(row[i] * row[i]);
                else
                    for (std::size_t i = 0; i < len; ++i) s.add(std::pow(row[i], pj));
                const double integral = s.value() * h;
                next[o] = pj == 1.0 ? integral : pj == 2.0 ? std::sqrt(integral) : std::pow(integral, 1.0 / pj);
            }
        }
        cur.swap(next);
    }
    return cur[0];
}

double lp_vec_norm(const GridFunction& u, std::span<const double> p) {
    return lp_vec_norm(u.moduli(), u.spec(), p);
}

std::vector<double> lq_aggregate(std::span<const GridFunction> us, std::span<const double> weights, double q) {
    if (us.empty()) throw UsageError("empty sequence");
    if (us.size() != weights.size()) throw UsageError("sequence and weights differ in length");
    if (!valid_exponent(q)) throw DomainError("q must lie in (0, inf]");
    const GridSpec& spec = us[0].spec();
    for (const auto& u : us)
        if (!(u.spec() == spec)) throw UsageError("sequence elements live on different grids");
    for (double w : weights)
        if (!std::isfinite(w)) throw DomainError("non-finite weight");

    const std::size_t size = spec.size();
    std::vector<double> out(size);
    for (std::size_t x = 0; x < size; ++x) {
        if (std::isinf(q)) {
            double m = 0.0;
            for (std::size_t k = 0; k < us.size(); ++k) m = std::max(m, std::abs(weights[k]) * std::abs(us[k][x]));
            out[x] = m;
        } else {
            CompensatedSum s;
            for (std::size_t k = 0; k < us.size(); ++k) {
                const double v = std::abs(weights[k]) * std::abs(us[k][x]);
                s.add(q == 2.0 ? v * v : q == 1.0 ? v : std::pow(v, q));
            }
            const double t = s.value();
            out[x] = q == 2.0 ? std::sqrt(t) : q == 1.0 ? t : std::pow(t, 1.0 / q);
        }
    }
    return out;
}

double lp_lq_norm(std::span<const GridFunction> us, std::span<const double> weights, const IntegrabilityVector& pq) {
    const auto agg = lq_aggregate(us, weights, pq.q());
    return lp_vec_norm(agg, us[0].spec(), pq.p());
}

}  // namespace anisoft
