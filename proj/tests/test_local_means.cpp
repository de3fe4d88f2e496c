#include "doctest.h"

#include "anisoft/errors.hpp"
#include "anisoft/families.hpp"
#include "anisoft/local_means.hpp"

#include <cmath>
#include <numbers>

using namespace anisoft;
using std::numbers::pi;

namespace {

// Exhaustive Peetre oracle with the same weight expression and division order.
std::vector<double> brute_peetre(const GridFunction& F, int j, const std::vector<double>& r,
                                 const AnisotropyVector& a) {
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
                for (int y0 = 0; y0 < N0; ++y0) {
                    const double v = std::abs(F[y0 + N0 * y1]) / weight(0, std::abs(x0 - y0), N0) /
                                     weight(1, std::abs(x1 - y1), N1);
                    best = std::max(best, v);
                }
            out[x0 + N0 * x1] = best;
        }
    return out;
}

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

}  // namespace

TEST_CASE("bump and its transform") {
    const double h = 1e-4;
    double mass = 0.0;
    for (int i = 1; i < 20000; ++i) mass += bump(-1 + i * h) * h;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(-1.2) == 0.0);
    for (double x : {-0.7, -0.2, 0.0, 0.35, 0.8}) {
        const double e = 1e-4;
        const double d1 = (bump(x + e) - bump(x - e)) / (2 * e);
        CHECK(bump_derivative(1, x) == doctest::Approx(d1).epsilon(1e-6));
        const double d3 = (bump_derivative(2, x + e) - bump_derivative(2, x - e)) / (2 * e);
        CHECK(bump_derivative(3, x) == doctest::Approx(d3).epsilon(1e-6));
    }
    CHECK(bump_hat(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double eta : {0.5, 2.0, 7.3}) {
        double s = 0.0;
        for (int i = 1; i < 20000; ++i) s += bump(-1 + i * h) * std::cos(eta * (-1 + i * h)) * h;
        CHECK(bump_hat(eta) == doctest::Approx(s).epsilon(1e-9));
    }
    const BumpTransform table(60.0);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const double eta = rng.uniform(-60.0, 60.0);
        CHECK(std::abs(table(eta) - bump_hat(eta)) < 1e-10);
    }
    CHECK(table(75.0) == bump_hat(75.0));
}

TEST_CASE("kernel certification") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    for (int N = 1; N <= 3; ++N) {
        for (const auto& a : {AnisotropyVector({1, 1}), AnisotropyVector({2, 1})}) {
            const auto kp = build_kernels(N, 1.0, a, g);
            CHECK(kp.moment_order() == 2 * N - 1);
            CHECK(kp.moment_residual <= 1e-8);
            CHECK(kp.spectral_identity_error <= 1e-10);
            CHECK(kp.outside_support_max <= 1e-14);
            CHECK(std::abs(kp.integral_k0) >= 1e-3);
            CHECK(std::abs(kp.integral_base) >= 1e-3);
            CHECK(kp.tauberian.delta > 0.0);

            // Sampled Tauberian floors on the ball and the corona.
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
            CHECK(ball >= kp.tauberian.delta);
            CHECK(corona >= kp.tauberian.delta);
        }
    }
}

TEST_CASE("kernel moments by independent quadrature") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({1, 1});
    for (int N = 1; N <= 2; ++N) {
        const auto kp = build_kernels(N, 1.0, a, g);
        const double w = kp.half_width();
        // Tensor trapezoidal rule on m x m interior nodes of the support square.
        const int m = 1600;
        const double h = 2 * w / m;
        std::vector<double> node(m - 1), kv((m - 1) * (m - 1)), k0v((m - 1) * (m - 1));
        for (int i = 1; i < m; ++i) node[i - 1] = -w + i * h;
        for (int i = 0; i < m - 1; ++i)
            for (int k = 0; k < m - 1; ++k) {
                const double p[2] = {node[i], node[k]};
                kv[i * (m - 1) + k] = kp.k_value(p);
                k0v[i * (m - 1) + k] = kp.k0_value(p);
            }
        auto integral = [&](const std::vector<double>& f, int px, int py) {
            double s = 0.0;
            for (int i = 0; i < m - 1; ++i)
                for (int k = 0; k < m - 1; ++k) s += std::pow(node[i], px) * std::pow(node[k], py) * f[i * (m - 1) + k];
            return s * h * h;
        };
        CHECK(std::abs(integral(kv, 0, 0)) <= 1e-8);
        CHECK(std::abs(integral(kv, 1, 0)) <= 1e-8);
        CHECK(std::abs(integral(kv, 0, 1)) <= 1e-8);
        CHECK(integral(k0v, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
        if (N == 2) {
            CHECK(std::abs(integral(kv, 2, 1)) <= 1e-8);
            CHECK(std::abs(integral(kv, 2, 0)) <= 1e-8);
            // Order 2N = 4 is the first non-vanishing moment: int x^4 Delta^2 k0 = 4!.
            CHECK(integral(kv, 4, 0) == doctest::Approx(24.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("kernel samples: evenness, support, refusals") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({2, 1});
    const auto kp = build_kernels(2, 1.0, a, g);
    for (int i1 = 0; i1 < 64; ++i1)
        for (int i0 = 0; i0 < 64; ++i0) {
            const int m0 = (64 - i0) % 64, m1 = (64 - i1) % 64;
            CHECK(kp.k()[i0 + 64 * i1] == kp.k()[m0 + 64 * m1]);
            CHECK(kp.k0()[i0 + 64 * i1] == kp.k0()[m0 + 64 * m1]);
        }
    CHECK(kp.k()[0].real() != 0.0);
    CHECK(kp.k()[32 + 64 * 32].real() == 0.0);

    CHECK_THROWS_AS(build_kernels(1, 1.0, a, GridSpec::cube(2, 2 * pi, 32)), ConfigError);
    CHECK_THROWS_AS(build_kernels(1, 1.5, a, g), DomainError);
    CHECK_THROWS_AS(build_kernels(0, 1.0, a, g), UsageError);
    const auto small = build_kernels(1, 0.5, AnisotropyVector({1, 1, 2}), GridSpec::cube(3, 2.0, 32));
    CHECK(small.moment_residual <= 1e-8);
    CHECK(small.spectral_identity_error <= 1e-10);
}

TEST_CASE("local means quasi-norm") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({1, 1});
    const auto kp = build_kernels(2, 1.0, a, g);
    const SpaceParams sp{1.0, a, IntegrabilityVector({2, 2}, 2)};
    CHECK(local_means_norm(GridFunction(g), sp, kp) == 0.0);

    Rng rng(41);
    const auto u = random_band_limited(g, a, 6.0, rng);
    const double v = local_means_norm(u, sp, kp);
    CHECK(v > 0.0);
    CHECK(local_means_norm(2.0 * u, sp, kp) == doctest::Approx(2 * v).epsilon(1e-12));

    const SpaceParams bad{4.0, a, IntegrabilityVector({2, 2}, 2)};
    CHECK_THROWS_AS(local_means_norm(u, bad, kp), PreconditionError);
    try {
        local_means_norm(u, bad, kp);
    } catch (const PreconditionError& e) {
        CHECK(e.condition() == "s < 2*N*a_min");
    }

    // A single mode: k_j * e = k^(2^-j xi) e, so every level is a constant.
    const std::vector<double> k{3, -2};
    const auto mode = GridFunction::from_function(g, [&](auto x) { return std::polar(1.0, k[0] * x[0] + k[1] * x[1]); });
    const auto rep = local_means_report(fft_forward(mode), sp, kp);
    const double vol = 4 * pi * pi;
    CHECK(rep.base_term == doctest::Approx(std::abs(kp.k0_hat(k)) * std::sqrt(vol)).epsilon(1e-12));
    double acc = 0.0;
    for (int j = 1; j < static_cast<int>(rep.level_norms.size()); ++j) {
        const std::vector<double> eta{std::exp2(-j) * k[0], std::exp2(-j) * k[1]};
        const double c = std::exp2(j) * std::abs(kp.k_hat(eta));
        acc += c * c;
    }
    CHECK(rep.sequence_term == doctest::Approx(std::sqrt(acc * vol)).epsilon(1e-11));
}

TEST_CASE("local means against f_norm under grid doubling") {
    const AnisotropyVector a({2, 1});
    const SpaceParams sp{0.5, a, IntegrabilityVector({2, 2}, 1)};
    const auto coarse = GridSpec::cube(2, 2 * pi, 32), fine = coarse.refined(2);
    const auto kp = build_kernels(2, 1.0, a, fine);
    const FamilyDescriptor fam = FamilyDescriptor::parse("random-band-limited:10");
    const auto fc = make_family(fam, coarse, a, 3.5, 7), ff = make_family(fam, fine, a, 3.5, 7);
    const auto rc = local_means_experiment(fc, sp, kp, build_partition(a, coarse));
    const auto rf = local_means_experiment(ff, sp, kp, build_partition(a, fine));
    CHECK(rc.count == 10);
    CHECK(rc.min > 0.0);
    CHECK(rf.min / rc.min == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rf.max / rc.max == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("Peetre maximal function") {
    const auto g = GridSpec::cube(2, 2 * pi, 16);
    const AnisotropyVector a({2, 1});
    Rng rng(5);
    const MaximalParams mp{{1.5, 0.8}};
    for (int trial = 0; trial < 3; ++trial) {
        auto F = GridFunction::from_function(g, [&](auto) { return cplx(rng.normal(), rng.normal()); });
        for (int j : {0, 1, 3}) {
            const auto m = peetre_maximal(F, j, mp, a);
            const auto oracle = brute_peetre(F, j, mp.r, a);
            bool equal = true, dominated = true;
            for (std::size_t i = 0; i < g.size(); ++i) {
                equal = equal && m[i].real() == oracle[i];
                dominated = dominated && m[i].real() >= std::abs(F[i]);
            }
            CHECK(equal);
            CHECK(dominated);
        }
    }
    // Constant input with a unit-mass kernel stays 1.
    const auto big = GridSpec::cube(2, 2 * pi, 64);
    const auto kp = build_kernels(1, 1.0, a, big);
    const auto one = fft_forward(GridFunction::from_function(big, [](auto) { return cplx(1.0); }));
    const auto m = peetre_maximal(one, 0, [&](auto xi) { return kp.k0_hat(xi); }, mp, a);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i].real() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(peetre_maximal(GridFunction(g), 0, MaximalParams{{1.0}}, a), UsageError);
    CHECK_THROWS_AS(peetre_maximal(GridFunction(g), 0, MaximalParams{{1.0, -1.0}}, a), DomainError);
}

TEST_CASE("parameter maps") {
    const auto t2 = default_theta_set(2);
    CHECK(t2.maps.size() == 8);
    CHECK(t2.min_abs_det == 0.5);
    CHECK(t2.max_entry == 1.5);
    const auto t3 = default_theta_set(3);
    CHECK(t3.maps.size() == 8);
    CHECK(t3.min_abs_det == doctest::Approx(1.0));
    CHECK(t3.max_entry == 1.5);
    CHECK_THROWS_AS(default_theta_set(1), UsageError);

    // Identity map reproduces the plain kernel symbol.
    const auto g = GridSpec::cube(3, 2.0, 32);
    const AnisotropyVector a({1, 1, 2});
    const auto kp = build_kernels(2, 0.5, a, g);
    auto table = std::make_shared<const BumpTransform>(100.0);
    const ThetaKernelSymbol id(kp, a, t3.maps[0], table);
    const ThetaKernelSymbol rot(kp, a, t3.maps[3], table);
    const std::vector<double> xi{3.0, -7.0, 11.0};
    const std::vector<double> eta{3.0 / 4, -7.0 / 4, 11.0 / 16};
    CHECK(id(2, xi) == doctest::Approx(kp.k_hat(eta)).epsilon(1e-8));
    // Rotation by pi/2: A^-T (x, y) = (-y, x).
    const std::vector<double> eta_r{7.0 / 4, 3.0 / 4, 11.0 / 16};
    CHECK(rot(2, xi) == doctest::Approx(kp.k_hat(eta_r)).epsilon(1e-8));
    CHECK(id(0, xi) == doctest::Approx(kp.k0_hat(xi)).epsilon(1e-8));
}

TEST_CASE("maximal inequality experiment") {
    const AnisotropyVector a({1, 1});
    const SpaceParams sp{1.0, a, IntegrabilityVector({2, 2}, 2)};
    const MaximalParams mp{{1.0, 1.0}};
    const auto g = GridSpec::cube(2, 2 * pi, 32);
    const auto psi = build_kernels(2, 1.0, a, g.refined(4));
    const auto phi = build_kernels(2, 0.6, a, g.refined(4));
    const auto theta = default_theta_set(2);

    const std::vector<GridFunction> zero{GridFunction(g)};
    const auto z = maximal_inequality_experiment(zero, sp, mp, psi, phi, theta);
    CHECK(z.thm32.skipped == 1);
    CHECK(z.thm31.skipped == 1);

    CHECK_THROWS_AS(maximal_inequality_experiment(zero, sp, MaximalParams{{0.4, 1.0}}, psi, phi, theta),
                    PreconditionError);
    const SpaceParams high{4.5, a, IntegrabilityVector({2, 2}, 2)};
    CHECK_THROWS_AS(maximal_inequality_experiment(zero, high, mp, psi, phi, theta), PreconditionError);

    // Single mode: |psi_j * e| is constant, so psi_j^* = |psi_j * e| and the ratio is exactly 1.
    const std::vector<double> k{2, 1};
    const std::vector<GridFunction> mode{
        GridFunction::from_function(g, [&](auto x) { return std::polar(1.0, k[0] * x[0] + k[1] * x[1]); })};
    const auto rm = maximal_inequality_experiment(mode, sp, mp, psi, phi, theta);
    CHECK(rm.thm32.max == doctest::Approx(1.0).epsilon(1e-12));
    double acc = std::pow(std::abs(psi.k0_hat(k)), 2);
    for (int j = 1; j < rm.rows[0].levels; ++j) {
        const std::vector<double> eta{std::exp2(-j) * k[0], std::exp2(-j) * k[1]};
        acc += std::pow(std::exp2(j) * std::abs(psi.k_hat(eta)), 2);
    }
    CHECK(rm.rows[0].thm32_rhs == doctest::Approx(std::sqrt(acc) * 2 * pi).epsilon(1e-10));
    CHECK(std::isfinite(rm.thm31.max));
    CHECK(rm.thm31.max > 0.0);

    const FamilyDescriptor fam = FamilyDescriptor::parse("random-band-limited:6");
    const auto fc = make_family(fam, g, a, 3.5, 11), ff = make_family(fam, g.refined(2), a, 3.5, 11);
    const auto rc = maximal_inequality_experiment(fc, sp, mp, psi, phi, theta);
    const auto rf = maximal_inequality_experiment(ff, sp, mp, psi, phi, theta);
    CHECK(rc.domination_violations == 0);
    CHECK(rf.domination_violations == 0);
    CHECK(rc.thm32.min >= 1.0);
    CHECK(rf.thm32.max / rc.thm32.max == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rf.thm31.max / rc.thm31.max == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("attained infimum") {
    const auto g = GridSpec::cube(2, 2 * pi, 256);
    const AnisotropyVector a({1, 1});
    const auto kp = build_kernels(2, 0.2, a, g);
    const SpaceParams sp{1.0, a, IntegrabilityVector({1, 2}, 2)};
    const auto f = periodic_gaussian(g, 1.0, {pi, pi}, 0.2);
    const Box U{{pi - 2.15, pi - 2.15}, {pi + 2.15, pi + 2.15}};
    CHECK(U.margin_to(numerical_support(f)) > 2 * kp.support_radius());

    // Perturbations sit across the x1 boundary of U at heights where f lives, so with
    // p_1 = 1 even the 1e-8 amplitudes change the norm at first order.
    std::vector<GridFunction> gs;
    for (int k = 0; k < 20; ++k) {
        const double amp = k % 5 == 0 ? 1e-8 : (k % 2 == 0 ? 1.0 : -0.5);
        gs.push_back(periodic_gaussian(g, amp, {0.0, pi + 1.6 * (k / 19.0 - 0.5)}, 0.09 + 0.001 * k));
    }
    const auto rep = attained_infimum_experiment(f, U, gs, kp, sp);
    CHECK(rep.all_increase);
    CHECK(rep.min_gap > 1e-12);
    CHECK(rep.gaps.size() == 20);

    // g reaching into U, and a box too tight around supp f.
    const std::vector<GridFunction> inside{periodic_gaussian(g, 1.0, {1.5, 1.0}, 0.1)};
    CHECK_THROWS_AS(attained_infimum_experiment(f, U, inside, kp, sp), PreconditionError);
    const Box tight{{pi - 1.8, pi - 1.8}, {pi + 1.8, pi + 1.8}};
    CHECK_THROWS_AS(attained_infimum_experiment(f, tight, gs, kp, sp), PreconditionError);
}
