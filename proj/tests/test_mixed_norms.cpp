#include "doctest.h"

#include "anisoft/errors.hpp"
#include "anisoft/mixed_norms.hpp"
#include "anisoft/random.hpp"

#include <cmath>
#include <functional>

using namespace anisoft;

namespace {

// Adaptive Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double left = (m - a) / 6 * (fa + 4 * f(lm) + fm);
    const double right = (b - m) / 6 * (fm + 4 * f(rm) + fb);
    if (depth > 30 || (depth > 4 && std::abs(left + right - whole) < 15 * tol)) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, tol / 2, depth + 1) + simpson(f, m, b, tol / 2, depth + 1);
}

GridFunction random_grid(const GridSpec& g, Rng& rng) {
    std::vector<cplx> s(g.size());
    for (auto& v : s) v = {rng.normal(), rng.normal()};
    return GridFunction(g, s);
}

}  // namespace

TEST_CASE("IntegrabilityVector") {
    IntegrabilityVector pq({2, 0.5}, 3);
    CHECK(pq.d() == 0.5);
    CHECK(IntegrabilityVector({2, 4}, kInf).d() == 1.0);
    CHECK_THROWS_AS(IntegrabilityVector({0.0}, 1), DomainError);
    CHECK_THROWS_AS(IntegrabilityVector({1.0}, -1), DomainError);
}

TEST_CASE("normalization and separable data") {
    GridSpec g({1.0, 1.0}, {16, 16});
    GridFunction one = GridFunction::from_function(g, [](auto) { return cplx(1.0); });
    for (auto p : {std::vector<double>{1, 1}, {0.5, 3}, {kInf, 2}, {2, kInf}})
        CHECK(lp_vec_norm(one, p) == doctest::Approx(1.0).epsilon(1e-14));

    GridSpec h({3.0, 5.0}, {32, 40});
    auto f = [](double x) { return 1.0 + std::sin(x); };
    auto gg = [](double y) { return std::exp(std::cos(y)); };
    auto u = GridFunction::from_function(h, [&](auto x) { return cplx(f(x[0]) * gg(x[1])); });
    for (auto p : {std::vector<double>{1, 2}, {3, 0.5}, {kInf, 1.5}}) {
        GridSpec h1({3.0}, {32}), h2({5.0}, {40});
        auto fu = GridFunction::from_function(h1, [&](auto x) { return cplx(f(x[0])); });
        auto gu = GridFunction::from_function(h2, [&](auto x) { return cplx(gg(x[0])); });
        const double expect = lp_vec_norm(fu, std::vector<double>{p[0]}) * lp_vec_norm(gu, std::vector<double>{p[1]});
        CHECK(lp_vec_norm(u, p) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("Gaussian against nested quadrature") {
    GridSpec g({10.0, 10.0}, {64, 64});
    auto gauss = [](double x, double y) { return std::exp(-(x - 5) * (x - 5) - 2 * (y - 5) * (y - 5)); };
    auto u = GridFunction::from_function(g, [&](auto x) { return cplx(gauss(x[0], x[1])); });
    const double value = lp_vec_norm(u, std::vector<double>{1, 2});
    auto outer = [&](double y) {
        const double inner = simpson([&](double x) { return gauss(x, y); }, 0, 10, 1e-13);
        return inner * inner;
    };
    const double oracle = std::sqrt(simpson(outer, 0, 10, 1e-11));
    CHECK(value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("lp_lq_norm examples") {
    Rng rng(9);
    GridSpec g({2.0, 1.0}, {16, 8});
    auto u = random_grid(g, rng);
    const std::vector<double> p{1.5, 3};
    std::vector<GridFunction> one{u};
    const std::vector<double> w1{1.0};
    CHECK(lp_lq_norm(one, w1, IntegrabilityVector(p, 2)) == doctest::Approx(lp_vec_norm(u, p)).epsilon(1e-14));

    auto left = GridFunction::from_function(g, [](auto x) { return cplx(x[0] < 1.0 ? 1.0 : 0.0); });
    auto right = GridFunction::from_function(g, [](auto x) { return cplx(x[0] >= 1.5 ? 1.0 : 0.0); });
    std::vector<GridFunction> two{left, right};
    const std::vector<double> w2{1.0, 1.0};
    CHECK(lp_lq_norm(two, w2, IntegrabilityVector({1, 1}, 1)) == doctest::Approx(1.0 + 0.5).epsilon(1e-14));

    std::vector<GridFunction> three{random_grid(g, rng), random_grid(g, rng), random_grid(g, rng)};
    const std::vector<double> w3{1.0, 2.0, 0.25};
    double acc = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += std::norm(w3[k] * three[k][x]);
        acc += s;
    }
    const double naive = std::sqrt(acc * g.cell_volume());
    CHECK(lp_lq_norm(three, w3, IntegrabilityVector({2, 2}, 2)) == doctest::Approx(naive).epsilon(1e-12));

    std::vector<GridFunction> mixed{u, GridFunction(GridSpec({2.0, 1.0}, {16, 10}))};
    CHECK_THROWS_AS(lp_lq_norm(mixed, w2, IntegrabilityVector(p, 2)), UsageError);
}

TEST_CASE("d-power subadditivity, homogeneity, monotonicity") {
    Rng rng(31);
    GridSpec g({1.0, 2.0}, {8, 12});
    const double vals[] = {0.5, 1, 2, kInf};
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
        const double p1 = vals[rng.integer(0, 3)], p2 = vals[rng.integer(0, 3)], q = vals[rng.integer(0, 3)];
        IntegrabilityVector pq({p1, p2}, q);
        std::vector<GridFunction> us{random_grid(g, rng), random_grid(g, rng)};
        std::vector<GridFunction> vs{random_grid(g, rng), random_grid(g, rng)};
        std::vector<GridFunction> sum{us[0] + vs[0], us[1] + vs[1]};
        const std::vector<double> w{1.0, 3.0};
        const double d = pq.d();
        const double lhs = std::pow(lp_lq_norm(sum, w, pq), d);
        const double rhs = std::pow(lp_lq_norm(us, w, pq), d) + std::pow(lp_lq_norm(vs, w, pq), d);
        if (lhs > rhs + 1e-9) ++bad;

        const std::vector<double> p{p1, p2};
        const cplx c(-2.5, 1.0);
        const double n = lp_vec_norm(us[0], p);
        CHECK(lp_vec_norm(c * us[0], p) == doctest::Approx(std::abs(c) * n).epsilon(1e-12));
        GridFunction bigger(g);
        for (std::size_t i = 0; i < g.size(); ++i) bigger[i] = us[0][i] * (1.0 + rng.uniform());
        CHECK(n <= lp_vec_norm(bigger, p) + 1e-12);
    }
    CHECK(bad == 0);
}
