#include "anisoft/spaces.hpp"

#include "anisoft/errors.hpp"
#include "anisoft/parallel.hpp"
#include "anisoft/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace anisoft {

namespace {

void check_compatible(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys) {
    if (!(u.spec() == sys.spec())) throw UsageError("function and partition use different grids");
    if (!(params.a == sys.anisotropy())) throw UsageError("space anisotropy differs from the partition's");
    if (params.pq.size() != u.spec().dim()) throw UsageError("p has the wrong number of entries");
}

double tail_check(const SpectralFunction& u, const DecompositionSystem& sys, TailPolicy policy) {
    if (policy == TailPolicy::enforce) certify_tail(sys, u);
    return tail_fraction(sys, u);
}

std::vector<GridFunction> blocks(const SpectralFunction& u, const DecompositionSystem& sys) {
    std::vector<GridFunction> out;
    out.reserve(sys.levels() + 1);
    for (int j = 0; j <= sys.levels(); ++j) out.push_back(apply_block(sys, j, u));
    return out;
}

double lq_sum(std::span<const double> v, double q) {
    if (std::isinf(q)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    CompensatedSum s;
    for (double x : v) s.add(std::pow(x, q));
    return std::pow(s.value(), 1.0 / q);
}

// Integer offsets d (excluding 0 unless include_zero) with Euclidean |d h| < radius
// (or <= when closed), |d_j| <= N_j / 2.
std::vector<std::vector<int>> offsets_within(const GridSpec& spec, double radius, bool closed, bool include_zero,
                                             bool half_space) {
    const std::size_t n = spec.dim();
    std::vector<int> lim(n);
    for (std::size_t j = 0; j < n; ++j)
        lim[j] = std::min(spec.points(j) / 2, static_cast<int>(std::floor(radius / spec.spacing(j))));
    std::vector<std::vector<int>> out;
    std::vector<int> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = -lim[j];
    while (true) {
        double r2 = 0.0;
        bool zero = true, positive = false;
        for (std::size_t j = 0; j < n; ++j) {
            const double t = d[j] * spec.spacing(j);
            r2 += t * t;
        }
        for (std::size_t j = n; j-- > 0;)
            if (d[j] != 0) {
                zero = false;
                positive = d[j] > 0;
                break;
            }
        const double r = std::sqrt(r2);
        const bool inside = closed ? r <= radius : r < radius;
        if (inside && (zero ? include_zero : (!half_space || positive))) out.push_back(d);
        std::size_t j = 0;
        while (j < n && d[j] == lim[j]) {
            d[j] = -lim[j];
            ++j;
        }
        if (j == n) break;
        ++d[j];
    }
    return out;
}

std::size_t shifted(const GridSpec& spec, std::span<const int> idx, std::span<const int> d, std::span<int> work) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const int N = spec.points(j);
        work[j] = ((idx[j] + d[j]) % N + N) % N;
    }
    return spec.ravel(work);
}

}  // namespace

namespace {

NormReport f_norm_impl(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
                       TailPolicy policy, bool with_levels) {
    check_compatible(u, params, sys);
    for (double p : params.pq.p())
        if (std::isinf(p)) throw UsageError("F-space quasi-norms need finite p");
    NormReport rep;
    rep.tail = tail_check(u, sys, policy);
    const auto us = blocks(u, sys);
    std::vector<double> w(us.size());
    for (std::size_t j = 0; j < us.size(); ++j) w[j] = std::pow(2.0, params.s * static_cast<double>(j));
    rep.value = lp_lq_norm(us, w, params.pq);
    if (with_levels)
        for (std::size_t j = 0; j < us.size(); ++j) rep.level_norms.push_back(w[j] * lp_vec_norm(us[j], params.pq.p()));
    return rep;
}

}  // namespace

NormReport f_norm_report(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
                         TailPolicy policy) {
    return f_norm_impl(u, params, sys, policy, true);
}

double f_norm(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy) {
    return f_norm_impl(u, params, sys, policy, false).value;
}

double f_norm(const GridFunction& u, const SpaceParams& params, const DecompositionSystem& sys, TailPolicy policy) {
    return f_norm(fft_forward(u), params, sys, policy);
}

NormReport b_norm_report(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
                         TailPolicy policy) {
    check_compatible(u, params, sys);
    NormReport rep;
    rep.tail = tail_check(u, sys, policy);
    for (int j = 0; j <= sys.levels(); ++j)
        rep.level_norms.push_back(std::pow(2.0, params.s * j) * lp_vec_norm(apply_block(sys, j, u), params.pq.p()));
    rep.value = lq_sum(rep.level_norms, params.pq.q());
    return rep;
}

double b_norm(const SpectralFunction& u, const SpaceParams& params, const DecompositionSystem& sys,
              TailPolicy policy) {
    return b_norm_report(u, params, sys, policy).value;
}

double b_norm(const GridFunction& u, const SpaceParams& params, const DecompositionSystem& sys, TailPolicy policy) {
    return b_norm(fft_forward(u), params, sys, policy);
}

double h_norm(const SpectralFunction& u, double s, const AnisotropyVector& a, std::span<const double> p) {
    if (s == 0.0) return lp_vec_norm(fft_inverse(u), p);
    return lp_vec_norm(apply_multiplier(xi_symbol(a, s), u), p);
}

double h_norm(const SpectralFunction& u, double s, const AnisotropyVector& a, std::span<const double> p,
              const DecompositionSystem& sys) {
    certify_tail(sys, u);
    return h_norm(u, s, a, p);
}

double holder_norm(const GridFunction& u, double rho) {
    if (!(rho > 0.0)) throw DomainError("Hoelder order must be positive");
    const GridSpec& spec = u.spec();
    const std::size_t n = spec.dim();
    const int k = static_cast<int>(std::ceil(rho)) - 1;  // k < rho <= k + 1
    const AnisotropyVector iso(std::vector<double>(n, 1.0));
    const auto uc = fft_forward(u);

    double total = 0.0;
    std::vector<GridFunction> top;
    std::vector<int> alpha(n, 0);
    std::function<void(std::size_t, int, int)> rec = [&](std::size_t l, int left, int order) {
        if (l + 1 == n) {
            alpha[l] = left;
            GridFunction d = order == 0 ? u : apply_multiplier(derivative_symbol(iso, alpha), uc);
            total += d.max_abs();
            if (order == k) top.push_back(std::move(d));
            return;
        }
        for (int m = left; m >= 0; --m) {
            alpha[l] = m;
            rec(l + 1, left - m, order);
        }
    };
    for (int order = 0; order <= k; ++order) rec(0, order, order);

    const auto offs = offsets_within(spec, 1.0, true, false, true);
    const double expo = rho - k;
    std::vector<double> dist(offs.size());
    for (std::size_t o = 0; o < offs.size(); ++o) {
        double r2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double t = offs[o][j] * spec.spacing(j);
            r2 += t * t;
        }
        dist[o] = std::pow(std::sqrt(r2), expo);
    }
    const std::size_t pairs = spec.size() * offs.size();
    constexpr std::size_t kMaxPairs = 1000000;
    std::vector<int> idx(n), work(n);
    for (const auto& d : top) {
        double best = 0.0;
        auto visit = [&](std::size_t x, std::size_t o) {
            spec.unravel(x, idx);
            const std::size_t y = shifted(spec, idx, offs[o], work);
            best = std::max(best, std::abs(d[x] - d[y]) / dist[o]);
        };
        if (pairs <= kMaxPairs) {
            for (std::size_t x = 0; x < spec.size(); ++x)
                for (std::size_t o = 0; o < offs.size(); ++o) visit(x, o);
        } else {
            Rng rng(0x401de5);
            for (std::size_t t = 0; t < kMaxPairs; ++t) {
                const std::size_t x = rng.bits() % spec.size();
                const std::size_t o = rng.bits() % offs.size();
                visit(x, o);
            }
        }
        total += best;
    }
    return total;
}

void RatioStats::add(double lhs, double rhs) {
    if (!(rhs > 0.0) || !std::isfinite(lhs) || !std::isfinite(rhs)) {
        ++skipped;
        ratios.push_back(std::numeric_limits<double>::quiet_NaN());
        return;
    }
    const double r = lhs / rhs;
    ratios.push_back(r);
    if (count == 0) {
        min = max = r;
    } else {
        min = std::min(min, r);
        max = std::max(max, r);
    }
    ++count;
}

namespace {

RatioStats collect(std::size_t count, const std::function<std::pair<double, double>(std::size_t)>& body) {
    std::vector<std::pair<double, double>> rows(count);
    parallel_for(count, [&](std::size_t i) { rows[i] = body(i); });
    RatioStats st;
    for (const auto& [l, r] : rows) st.add(l, r);
    return st;
}

}  // namespace

RatioStats operator_ratio_experiment(std::span<const GridFunction> family, const MultiplierSymbol& sym,
                                     const SpaceParams& params, const DecompositionSystem& sys) {
    SpaceParams shifted_params{params.s - sym.order(), params.a, params.pq};
    return collect(family.size(), [&](std::size_t i) {
        const auto uc = fft_forward(family[i]);
        const double rhs = f_norm(uc, params, sys);
        const double lhs = f_norm(multiply_spectrum(sym, uc), shifted_params, sys);
        return std::pair{lhs, rhs};
    });
}

RatioStats derivative_boundedness_experiment(std::span<const GridFunction> family, std::span<const int> alpha,
                                             const SpaceParams& params, const DecompositionSystem& sys) {
    return operator_ratio_experiment(family, derivative_symbol(params.a, alpha), params, sys);
}

GridFunction sup_over_ball(const GridFunction& u, double radius) {
    const GridSpec& spec = u.spec();
    const auto offs = offsets_within(spec, radius, false, true, false);
    const auto mod = u.moduli();
    GridFunction out(spec);
    std::vector<int> idx(spec.dim()), work(spec.dim());
    for (std::size_t x = 0; x < spec.size(); ++x) {
        spec.unravel(x, idx);
        double m = 0.0;
        for (const auto& d : offs) m = std::max(m, mod[shifted(spec, idx, d, work)]);
        out[x] = m;
    }
    return out;
}

RatioStats sup_ball_experiment(std::span<const GridFunction> family, const SpaceParams& params,
                               const DecompositionSystem& sys) {
    double need = 0.0, pmin = kInf;
    for (std::size_t l = 0; l < params.a.size(); ++l) {
        pmin = std::min(pmin, params.pq.p(l));
        need += params.a[l] / pmin;
    }
    if (!(params.s > need)) {
        std::ostringstream msg;
        msg << "s = " << params.s << " but the sup-over-ball estimate needs s > " << need;
        throw PreconditionError("requires s > sum_l a_l / min(p_1..p_l)", msg.str());
    }
    return collect(family.size(), [&](std::size_t i) {
        const double rhs = f_norm(family[i], params, sys);
        const double lhs = lp_vec_norm(sup_over_ball(family[i], 1.0), params.pq.p());
        return std::pair{lhs, rhs};
    });
}

RatioStats holder_embedding_experiment(std::span<const GridFunction> family, double s, double rho,
                                       const DecompositionSystem& sys) {
    if (!(s <= rho)) throw PreconditionError("requires s <= rho", "s = " + std::to_string(s));
    const std::size_t n = sys.spec().dim();
    SpaceParams params{s, sys.anisotropy(), IntegrabilityVector(std::vector<double>(n, kInf), kInf)};
    return collect(family.size(), [&](std::size_t i) {
        const double lhs = b_norm(family[i], params, sys);
        const double rhs = holder_norm(family[i], rho);
        return std::pair{lhs, rhs};
    });
}

RatioStats rescaling_experiment(std::span<const GridFunction> family, const SpaceParams& params, double lambda) {
    if (family.empty()) return {};
    const GridSpec& spec = family[0].spec();
    const auto sys = build_partition(params.a, spec);
    const SpaceParams scaled{lambda * params.s, params.a.scaled(lambda), params.pq};
    const auto sys_scaled = build_partition(scaled.a, spec);
    return collect(family.size(), [&](std::size_t i) {
        const auto uc = fft_forward(family[i]);
        return std::pair{f_norm(uc, scaled, sys_scaled), f_norm(uc, params, sys)};
    });
}

}  // namespace anisoft
