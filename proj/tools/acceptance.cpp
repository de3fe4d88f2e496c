#include "acceptance.hpp"

#include "anisoft/anisotropy.hpp"
#include "anisoft/diffeo.hpp"
#include "anisoft/errors.hpp"
#include "anisoft/faadibruno.hpp"
#include "anisoft/families.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/local_means.hpp"
#include "anisoft/multipliers.hpp"
#include "anisoft/random.hpp"
#include "anisoft/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

namespace anisoft::acceptance {

namespace {

using std::numbers::pi;
using json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double max_diff(const GridFunction& u, const GridFunction& v) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) e = std::max(e, std::abs(u[i] - v[i]));
    return e;
}

/// Largest relative move of either band endpoint between two resolutions.
double band_shift(const RatioStats& coarse, const RatioStats& fine) {
    return std::max(std::abs(fine.min / coarse.min - 1.0), std::abs(fine.max / coarse.max - 1.0));
}

json band_json(const RatioStats& r) { return json{{"min", r.min}, {"max", r.max}, {"count", r.count}}; }

// ---- 1 -------------------------------------------------------------------

double closed_form_21(double x1, double x2) {
    return std::sqrt(0.5) * std::sqrt(x2 * x2 + std::sqrt(x2 * x2 * x2 * x2 + 4 * x1 * x1));
}

CriterionResult distance() {
    CriterionResult res{1, "anisotropic distance", false, {}, json::object()};
    const AnisotropyVector a21({2, 1});
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int k = 0; k <= 100; ++k) {
            const double x1 = -10.0 + 0.2 * i, x2 = -10.0 + 0.2 * k;
            worst = std::max(worst, std::abs(aniso_distance(a21, std::vector<double>{x1, x2}) - closed_form_21(x1, x2)));
        }
    res.metrics["closed_form_max_error"] = worst;
    bool ok = worst <= 1e-10;

    Rng rng(2024);
    int bad_h = 0, bad_t = 0, bad_s = 0;
    for (const auto& a : {a21, AnisotropyVector({1, 1}), AnisotropyVector({2, 2, 1})}) {
        for (int i = 0; i < 10000; ++i) {
            std::vector<double> x(a.size()), y(a.size()), xy(a.size());
            for (std::size_t j = 0; j < a.size(); ++j) {
                x[j] = rng.normal() * std::pow(10.0, rng.uniform(-2, 2));
                y[j] = rng.normal() * std::pow(10.0, rng.uniform(-2, 2));
                xy[j] = x[j] + y[j];
            }
            const double t = std::pow(10.0, rng.uniform(-3, 3));
            const double dx = aniso_distance(a, x);
            if (std::abs(aniso_distance(a, aniso_dilate(a, t, x)) - t * dx) > 1e-9 * t * dx) ++bad_h;
            if (aniso_distance(a, xy) > dx + aniso_distance(a, y) + 1e-10 * (dx + 1.0)) ++bad_t;
            const auto br = aniso_bracket(a, x);
            if (br.lower > dx * (1 + 1e-12) || dx > br.upper * (1 + 1e-12)) ++bad_s;
        }
    }
    res.metrics["homogeneity_failures"] = bad_h;
    res.metrics["triangle_failures"] = bad_t;
    res.metrics["sandwich_failures"] = bad_s;
    ok = ok && bad_h == 0 && bad_t == 0 && bad_s == 0;
    res.passed = ok;
    res.summary = "closed-form err " + num(worst) + ", property failures " + std::to_string(bad_h + bad_t + bad_s) +
                  " of 3x3x10^4";
    return res;
}

// ---- 2 -------------------------------------------------------------------

CriterionResult partition() {
    CriterionResult res{2, "partition of unity", false, {}, json::array()};
    struct Case {
        AnisotropyVector a;
        GridSpec g;
    };
    const std::vector<Case> cases{{AnisotropyVector({1, 1}), GridSpec::cube(2, 2 * pi, 64)},
                                  {AnisotropyVector({2, 1}), GridSpec({2 * pi, 2 * pi}, {128, 32})},
                                  {AnisotropyVector({2, 2, 1}), GridSpec({2 * pi, 2 * pi, 2 * pi}, {32, 32, 16})}};
    double worst = 0.0;
    long violations = 0;
    for (const auto& c : cases) {
        const auto sys = build_partition(c.a, c.g);
        const int J = sys.levels();
        const auto r = sys.radii();
        double dev = 0.0;
        long bad = 0;
        for (std::size_t f = 0; f < c.g.size(); ++f) {
            double s = 0.0;
            for (int j = 0; j <= J; ++j) {
                const double v = sys.symbol(j)[f];
                s += v;
                const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 1);
                const double hi = j == 0 ? 1.5 : 3.0 * std::ldexp(1.0, j - 1);
                if ((r[f] < lo || r[f] > hi) && v >= 1e-14) ++bad;
            }
            if (r[f] <= std::ldexp(1.0, J - 1)) dev = std::max(dev, std::abs(s - 1.0));
        }
        worst = std::max(worst, dev);
        violations += bad;
        res.metrics.push_back({{"levels", J}, {"max_deviation", dev}, {"support_violations", bad}});
    }
    res.passed = worst <= 1e-8 && violations == 0;
    res.summary = "max |sum - 1| " + num(worst) + ", support violations " + std::to_string(violations);
    return res;
}

// ---- 3 -------------------------------------------------------------------

CriterionResult single_block() {
    CriterionResult res{3, "single-block identity", false, {}, json::object()};
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({2, 1});
    const auto sys = build_partition(a, g);
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto u = random_band_limited(g, a, 1.0, rng);
        const SpaceParams par{rng.uniform(-1, 3), a, IntegrabilityVector({rng.uniform(1, 4), rng.uniform(1, 4)}, 2)};
        const double f = f_norm(u, par, sys);
        const double l = lp_vec_norm(u, par.pq.p());
        worst = std::max(worst, std::abs(f - l) / l);
    }
    res.metrics["max_relative_error"] = worst;
    res.passed = worst <= 1e-6;
    res.summary = "max |f_norm - lp|/lp " + num(worst) + " over 20 functions";
    return res;
}

// ---- 4 -------------------------------------------------------------------

CriterionResult lifts() {
    CriterionResult res{4, "lift operators", false, {}, json::object()};
    const AnisotropyVector a({2, 1});
    {
        const auto g = GridSpec::cube(2, 2 * pi, 64);
        Rng rng(17);
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            auto u = random_band_limited(g, a, 5.0 - 0.5 * t, rng);
            auto uc = fft_forward(u);
            const double scale = u.max_abs();
            worst = std::max(worst, max_diff(lift_roundtrip(a, 2.5, uc), u) / scale);
            worst = std::max(worst, max_diff(lift_roundtrip(a, -1.0, uc), u) / scale);
            for (int k = 1; k <= 2; ++k) {
                auto down = multiply_spectrum(axis_power_symbol(a, k, -0.75), uc);
                worst = std::max(worst, max_diff(apply_multiplier(axis_power_symbol(a, k, 0.75), down), u) / scale);
            }
        }
        res.metrics["roundtrip_max_error"] = worst;
        res.passed = worst <= 1e-10;
        res.summary = "roundtrip err " + num(worst);
    }
    const auto g = GridSpec::cube(2, 2 * pi, 32), g2 = g.refined(2);
    const auto sys = build_partition(a, g), sys2 = build_partition(a, g2);
    const FamilyDescriptor fd{FamilyKind::random_band_limited, 20};
    const auto fam = make_family(fd, g, a, 3.5, 77), fam2 = make_family(fd, g2, a, 3.5, 77);
    const SpaceParams par{1.0, a, IntegrabilityVector({2, 3}, 2)};
    double worst_shift = 0.0;
    for (const auto& sym : {lambda_symbol(a, 2.5), xi_symbol(a, 1.5), axis_power_symbol(a, 1, 0.5),
                            axis_power_symbol(a, 2, -0.75)}) {
        const auto c = operator_ratio_experiment(fam, sym, par, sys);
        const auto f = operator_ratio_experiment(fam2, sym, par, sys2);
        const double shift = band_shift(c, f);
        worst_shift = std::max(worst_shift, shift);
        res.metrics["bands"].push_back(
            {{"operator", sym.description()}, {"coarse", band_json(c)}, {"fine", band_json(f)}, {"shift", shift}});
    }
    res.passed = res.passed && worst_shift <= 0.10;
    res.summary += ", band shift under doubling " + num(worst_shift);
    return res;
}

// ---- 5 -------------------------------------------------------------------

CriterionResult local_means() {
    CriterionResult res{5, "local-means equivalence", false, {}, json::array()};
    const std::vector<SpaceParams> tuples{{1.0, AnisotropyVector({1, 1}), IntegrabilityVector({2, 2}, 2)},
                                          {0.5, AnisotropyVector({2, 1}), IntegrabilityVector({2, 2}, 1)},
                                          {1.5, AnisotropyVector({2, 1}), IntegrabilityVector({1, 3}, 2)}};
    const auto coarse = GridSpec::cube(2, 2 * pi, 32), fine = coarse.refined(2);
    const FamilyDescriptor fd{FamilyKind::random_band_limited, 30};
    double worst = 0.0;
    bool ok = true;
    for (const auto& sp : tuples) {
        const auto kp = build_kernels(2, 1.0, sp.a, fine);
        const auto fc = make_family(fd, coarse, sp.a, 3.5, 7), ff = make_family(fd, fine, sp.a, 3.5, 7);
        const auto rc = local_means_experiment(fc, sp, kp, build_partition(sp.a, coarse));
        const auto rf = local_means_experiment(ff, sp, kp, build_partition(sp.a, fine));
        const double shift = band_shift(rc, rf);
        worst = std::max(worst, shift);
        ok = ok && rc.count == 30 && rf.count == 30 && rc.min > 0.0 && shift < 0.15;
        res.metrics.push_back({{"s", sp.s}, {"coarse", band_json(rc)}, {"fine", band_json(rf)}, {"shift", shift}});
    }
    res.passed = ok;
    res.summary = "max band endpoint shift " + num(worst) + " over 3 parameter tuples, 30 functions";
    return res;
}

// ---- 6 -------------------------------------------------------------------

std::vector<double> brute_peetre(const GridFunction& F, int j, const std::vector<double>& r, const AnisotropyVector& a) {
    const auto& g = F.spec();
    const int N0 = g.points(0), N1 = g.points(1);
    auto weight = [&](std::size_t l, int d, int N) {
        const int dd = std::min(d, N - d);
        return std::pow(1.0 + std::exp2(j * a[l]) * (dd * g.spacing(l)), r[l]);
    };
    std::vector<double> out(g.size());
    for (int x1 = 0; x1 < N1; ++x1)
        for (int x0 = 0; x0 < N0; ++x0) {
            double best = 0.0;
            for (int y1 = 0; y1 < N1; ++y1)
                for (int y0 = 0; y0 < N0; ++y0)
                    best = std::max(best, std::abs(F[y0 + N0 * y1]) / weight(0, std::abs(x0 - y0), N0) /
                                              weight(1, std::abs(x1 - y1), N1));
            out[x0 + N0 * x1] = best;
        }
    return out;
}

CriterionResult maximal() {
    CriterionResult res{6, "maximal machinery", false, {}, json::object()};
    const AnisotropyVector a({1, 1});
    const MaximalParams mp{{1.0, 1.0}};

    const auto g16 = GridSpec::cube(2, 2 * pi, 16);
    Rng rng(5);
    long mismatches = 0;
    const MaximalParams mp16{{1.5, 0.8}};
    const AnisotropyVector a21({2, 1});
    for (int trial = 0; trial < 3; ++trial) {
        auto F = GridFunction::from_function(g16, [&](auto) { return cplx(rng.normal(), rng.normal()); });
        for (int j : {0, 1, 3}) {
            const auto m = peetre_maximal(F, j, mp16, a21);
            const auto oracle = brute_peetre(F, j, mp16.r, a21);
            for (std::size_t i = 0; i < g16.size(); ++i) mismatches += m[i].real() != oracle[i];
        }
    }
    res.metrics["brute_force_mismatches"] = mismatches;

    const SpaceParams sp{1.0, a, IntegrabilityVector({2, 2}, 2)};
    const auto g = GridSpec::cube(2, 2 * pi, 32);
    const auto psi = build_kernels(2, 1.0, a, g.refined(4));
    const auto phi = build_kernels(2, 0.6, a, g.refined(4));
    const auto theta = default_theta_set(2);
    const FamilyDescriptor fd{FamilyKind::random_band_limited, 10};
    const auto fc = make_family(fd, g, a, 3.5, 11), ff = make_family(fd, g.refined(2), a, 3.5, 11);
    const auto rc = maximal_inequality_experiment(fc, sp, mp, psi, phi, theta);
    const auto rf = maximal_inequality_experiment(ff, sp, mp, psi, phi, theta);
    const long dom = rc.domination_violations + rf.domination_violations;
    const double shift = band_shift(rc.thm32, rf.thm32);
    res.metrics["domination_violations"] = dom;
    res.metrics["inverse_coarse"] = band_json(rc.thm32);
    res.metrics["inverse_fine"] = band_json(rf.thm32);
    res.metrics["inverse_shift"] = shift;
    res.metrics["parameter_coarse"] = band_json(rc.thm31);
    res.metrics["parameter_fine"] = band_json(rf.thm31);
    res.passed = mismatches == 0 && dom == 0 && shift <= 0.15;
    res.summary = "brute-force mismatches " + std::to_string(mismatches) + ", domination violations " +
                  std::to_string(dom) + ", inverse-ratio band shift " + num(shift);
    return res;
}

// ---- 7 -------------------------------------------------------------------

CriterionResult invariance() {
    CriterionResult res{7, "diffeomorphism invariance", false, {}, json::object()};
    const double L = 4.0 * pi, c = 2.0 * pi;
    const GridSpec g = GridSpec::cube(2, L, 128), g2 = g.refined(2);
    const AnisotropyVector a({1, 1});
    const FamilyDescriptor fd{FamilyKind::gaussians, 50};
    const auto fam = make_family(fd, g, a, 0.0, 31), fam2 = make_family(fd, g2, a, 0.0, 31);
    const std::vector<SpaceParams> points = {
        {1.0, AnisotropyVector({1, 1}), IntegrabilityVector({2.0, 2.0}, 2.0)},
        {0.5, AnisotropyVector({2, 1}), IntegrabilityVector({1.5, 3.0}, 1.0)},
        {1.5, AnisotropyVector({1, 2}), IntegrabilityVector({3.0, 2.0}, 2.0)},
    };
    bool ok = true;

    // Exact cases: the identity and lattice translations (lattice on both grids).
    const double h = g.spacing(0);
    double exact_err = 0.0;
    for (const auto& sigma : {Diffeomorphism::identity(2), Diffeomorphism::translation({3 * h, 0.0}),
                              Diffeomorphism::translation({-5 * h, 0.0}), Diffeomorphism::translation({3 * h, -7 * h})}) {
        for (const auto& r : invariance_experiment(fam, sigma, points).rows)
            exact_err = std::max(exact_err, std::abs(r.ratio - 1.0));
    }
    res.metrics["identity_translation_max_error"] = exact_err;
    ok = ok && exact_err <= 1e-10;

    const std::vector<Diffeomorphism> maps{
        Diffeomorphism::distortion(2, {0}, {c}, 4.0, 0.8, {1.0}),
        Diffeomorphism::distortion(2, {0}, {c + 0.5}, 3.5, -0.6, {1.0}),
        Diffeomorphism::distortion(2, {0}, {c - 0.4}, 3.0, 0.5, {1.0}),
        Diffeomorphism::distortion(2, {0}, {c}, 4.5, -0.9, {1.0}),
        Diffeomorphism::distortion(2, {0}, {c + 0.3}, 2.5, 0.4, {1.0}),
    };
    double worst = 0.0;
    for (const auto& sigma : maps) {
        ok = ok && sigma.kind() == DiffeoKind::structured;
        const auto tc = invariance_experiment(fam, sigma, points);
        const auto tf = invariance_experiment(fam2, sigma, points);
        json entry{{"sigma", sigma.description()}, {"bands", json::array()}};
        for (std::size_t p = 0; p < points.size(); ++p) {
            const double shift = band_shift(tc.bands[p], tf.bands[p]);
            worst = std::max(worst, shift);
            ok = ok && tc.bands[p].count == 50 && shift <= 0.20;
            entry["bands"].push_back({{"coarse", band_json(tc.bands[p])}, {"fine", band_json(tf.bands[p])}, {"shift", shift}});
        }
        for (const auto& r : tc.rows) ok = ok && r.hypothesis_ok;
        res.metrics["structured"].push_back(entry);
    }

    const auto blk = Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::distortion(2, {0}, {c}, 4.0, 0.8, {1.0}),
                                                        Diffeomorphism::distortion(2, {1}, {c}, 3.5, -0.6, {1.0})});
    const auto br = block_invariance_experiment(fam, blk, points[1]);
    res.metrics["block"] = {{"composite", band_json(br.composite)}, {"bound", br.bound}};
    ok = ok && br.composite.max <= 1.1 * br.bound;

    // Contrast: a twist mixing both axes at p_1 != p_2 sits outside the hypotheses; reported only.
    const auto twist = Diffeomorphism::twist(2, 0, 1, {c, c}, 3.0, 0.6);
    const std::vector<SpaceParams> contrast_point{points[1]};
    const auto cc = invariance_experiment(fam, twist, contrast_point);
    res.metrics["contrast"] = {{"sigma", twist.description()},
                               {"hypothesis_ok", cc.rows.front().hypothesis_ok},
                               {"coarse", band_json(cc.bands[0])}};

    res.passed = ok;
    res.summary = "identity/translation err " + num(exact_err) + ", structured band shift " + num(worst) +
                  ", block composite max " + num(br.composite.max) + " vs bound " + num(br.bound);
    return res;
}

// ---- 8 -------------------------------------------------------------------

using Poly = std::map<std::vector<int>, Rational>;

// Partial Bell polynomials by B_{k,a} = sum_i C(k-1, i-1) x_i B_{k-i,a-1}.
const Poly& bell(int k, int a, int K) {
    static std::map<std::tuple<int, int, int>, Poly> memo;
    const auto key = std::make_tuple(k, a, K);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Poly out;
    if (k == 0 && a == 0) {
        out[std::vector<int>(K + 1, 0)] = 1;
    } else if (k > 0 && a > 0) {
        for (int i = 1; i <= k - a + 1; ++i) {
            boost::multiprecision::cpp_int binom = 1;
            for (int t = 0; t < i - 1; ++t) binom = binom * (k - 1 - t) / (t + 1);
            for (const auto& [base, c] : bell(k - i, a - 1, K)) {
                auto mono = base;
                mono[i] += 1;
                out[mono] += Rational(binom) * c;
            }
        }
    }
    return memo[key] = out;
}

CriterionResult faa_di_bruno() {
    CriterionResult res{8, "Faa di Bruno", false, {}, json::object()};
    int bell_mismatch = 0;
    for (int k = 1; k <= 8; ++k) {
        std::map<int, Poly> got;
        for (const auto& t : enumerate_terms({k}, 1, 1).terms) {
            std::vector<int> mono(k + 1, 0);
            for (const auto& f : t.factors) mono[f.beta[0]] += f.count;
            got[t.alpha[0]][mono] += t.coefficient;
        }
        for (int a = 1; a <= k; ++a) bell_mismatch += got[a] != bell(k, a, k);
    }
    const auto checks = verify_suite(4, 1e-2);
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, c.relative_error);
    const bool counts = term_count({2}, 1, 1) == 2 && term_count({3}, 1, 1) == 3 && term_count({4}, 1, 1) == 5;
    res.metrics["bell_mismatches"] = bell_mismatch;
    res.metrics["finite_difference_checks"] = checks.size();
    res.metrics["finite_difference_max_relative_error"] = worst;
    res.metrics["term_counts_exact"] = counts;
    res.passed = bell_mismatch == 0 && worst <= 1e-6 && counts;
    res.summary = "Bell mismatches " + std::to_string(bell_mismatch) + ", FD max rel err " + num(worst) + " over " +
                  std::to_string(checks.size()) + " derivatives, term counts " + (counts ? "exact" : "wrong");
    return res;
}

// ---- 9 -------------------------------------------------------------------

GridFunction periodic_gaussian(const GridSpec& g, double amp, std::vector<double> c, double w) {
    return GridFunction::from_function(g, [&](auto x) {
        double r2 = 0.0;
        for (std::size_t l = 0; l < x.size(); ++l) {
            double d = std::fmod(std::abs(x[l] - c[l]), g.length(l));
            d = std::min(d, g.length(l) - d);
            r2 += d * d;
        }
        return cplx(amp * std::exp(-0.5 * r2 / (w * w)));
    });
}

CriterionResult infimum() {
    CriterionResult res{9, "attained infimum", false, {}, json::object()};
    const auto g = GridSpec::cube(2, 2 * pi, 256);
    const AnisotropyVector a({1, 1});
    const auto kp = build_kernels(2, 0.2, a, g);
    const SpaceParams sp{1.0, a, IntegrabilityVector({1, 2}, 2)};
    const auto f = periodic_gaussian(g, 1.0, {pi, pi}, 0.2);
    const Box U{{pi - 2.15, pi - 2.15}, {pi + 2.15, pi + 2.15}};
    std::vector<GridFunction> gs;
    for (int k = 0; k < 20; ++k) {
        const double amp = k % 5 == 0 ? 1e-8 : (k % 2 == 0 ? 1.0 : -0.5);
        gs.push_back(periodic_gaussian(g, amp, {0.0, pi + 1.6 * (k / 19.0 - 0.5)}, 0.09 + 0.001 * k));
    }
    const auto rep = attained_infimum_experiment(f, U, gs, kp, sp);
    res.metrics["base_norm"] = rep.base_norm;
    res.metrics["min_gap"] = rep.min_gap;
    res.metrics["perturbations"] = rep.gaps.size();
    res.passed = rep.all_increase && rep.min_gap > 1e-12 && rep.gaps.size() == 20;
    res.summary = "min gap " + num(rep.min_gap) + " over " + std::to_string(rep.gaps.size()) + " perturbations";
    return res;
}

// ---- 10 ------------------------------------------------------------------

CriterionResult kernels() {
    CriterionResult res{10, "kernel certification", false, {}, json::array()};
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    double moment = 0.0, spectral = 0.0;
    bool floors = true;
    for (int N = 1; N <= 3; ++N)
        for (const auto& a : {AnisotropyVector({1, 1}), AnisotropyVector({2, 1})}) {
            const auto kp = build_kernels(N, 1.0, a, g);
            moment = std::max(moment, kp.moment_residual);
            spectral = std::max(spectral, kp.spectral_identity_error);
            const double eps = kp.tauberian.epsilon;
            double ball = kInf, corona = kInf;
            for (int i = 0; i < 200; ++i) {
                const double th = 2 * pi * i / 200;
                const double u[2] = {std::cos(th), std::sin(th)};
                for (int k = 1; k <= 60; ++k) {
                    const double t = 2 * eps * k / 61.0;
                    const auto xi = aniso_dilate(a, t, u);
                    ball = std::min(ball, std::abs(kp.k0_hat(xi)));
                    if (t > eps / 2) corona = std::min(corona, std::abs(kp.k_hat(xi)));
                }
            }
            const bool ok = kp.tauberian.delta > 0.0 && ball >= kp.tauberian.delta && corona >= kp.tauberian.delta &&
                            std::abs(kp.integral_k0) >= 1e-3;
            floors = floors && ok;
            res.metrics.push_back({{"N", N},
                                   {"a", std::vector<double>(a.weights().begin(), a.weights().end())},
                                   {"moment_residual", kp.moment_residual},
                                   {"spectral_identity_error", kp.spectral_identity_error},
                                   {"delta", kp.tauberian.delta},
                                   {"sampled_floor", std::min(ball, corona)}});
        }
    res.passed = moment <= 1e-8 && spectral <= 1e-10 && floors;
    res.summary = "moment residual " + num(moment) + ", spectral identity err " + num(spectral) + ", Tauberian floors " +
                  (floors ? "hold" : "fail");
    return res;
}

}  // namespace

CriterionResult criterion(int id) {
    switch (id) {
        case 1: return distance();
        case 2: return partition();
        case 3: return single_block();
        case 4: return lifts();
        case 5: return local_means();
        case 6: return maximal();
        case 7: return invariance();
        case 8: return faa_di_bruno();
        case 9: return infimum();
        case 10: return kernels();
    }
    throw UsageError("criterion " + std::to_string(id) + " outside [1, " + std::to_string(kCriteria) + "]");
}

std::vector<CriterionResult> run(const std::vector<int>& ids) {
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(criterion(id));
    return out;
}

}  // namespace anisoft::acceptance
