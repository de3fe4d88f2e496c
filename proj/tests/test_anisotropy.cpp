#include "doctest.h"

#include "anisoft/anisotropy.hpp"
#include "anisoft/errors.hpp"
#include "anisoft/random.hpp"

#include <cmath>

using namespace anisoft;

namespace {

// Plain bisection on sum x_j^2 / t^(2 a_j) = 1 over a generous bracket.
double bisect_distance(const std::vector<double>& a, const std::vector<double>& x) {
    double lo = 1e-300, hi = 1.0;
    auto f = [&](double t) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * x[j] / std::pow(t, 2 * a[j]);
        return s - 1.0;
    };
    while (f(hi) > 0) hi *= 2;
    for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double closed_form_21(double x1, double x2) {
    return std::sqrt(0.5) * std::sqrt(x2 * x2 + std::sqrt(x2 * x2 * x2 * x2 + 4 * x1 * x1));
}

}  // namespace

TEST_CASE("AnisotropyVector validates weights") {
    CHECK_THROWS_AS(AnisotropyVector({0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(AnisotropyVector({}), DomainError);
    CHECK_THROWS_AS(AnisotropyVector({1.0, NAN}), DomainError);
    AnisotropyVector a({2.0, 1.0, 3.0});
    CHECK(a.min() == 1.0);
    CHECK(a.sum() == 6.0);
    CHECK(a.prepend_unit().size() == 4);
}

TEST_CASE("aniso_distance examples") {
    CHECK(aniso_distance(AnisotropyVector({1, 1}), std::vector<double>{3, 4}) ==
          doctest::Approx(5.0).epsilon(1e-14));
    AnisotropyVector a({2, 1});
    CHECK(aniso_distance(a, std::vector<double>{2, 0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    const double golden = std::sqrt((1 + std::sqrt(5.0)) / 2);
    CHECK(aniso_distance(a, std::vector<double>{1, 1}) == doctest::Approx(golden).epsilon(1e-13));
    CHECK(std::abs(golden - bisect_distance({2, 1}, {1, 1})) < 1e-13);
    CHECK(aniso_distance(a, std::vector<double>{0, 0}) == 0.0);
    CHECK_THROWS_AS(aniso_distance(a, std::vector<double>{INFINITY, 0}), DomainError);
}

TEST_CASE("aniso_dilate") {
    AnisotropyVector a({2, 1});
    const std::vector<double> x{1, 1};
    auto y = aniso_dilate(a, 2.0, x);
    CHECK(y[0] == 4.0);
    CHECK(y[1] == 2.0);
    CHECK(aniso_dilate(a, 1.0, x) == x);
    CHECK(aniso_distance(a, aniso_dilate(a, 3.0, x)) ==
          doctest::Approx(3.0 * 1.2720196495140689).epsilon(1e-13));
    CHECK_THROWS_AS(aniso_dilate(a, 0.0, x), DomainError);
    CHECK_THROWS_AS(aniso_dilate(a, -1.0, x), DomainError);
}

TEST_CASE("residual is small at the computed distance") {
    Rng rng(11);
    AnisotropyVector a({2.5, 1.0, 1.5});
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x{rng.normal() * 10, rng.normal(), rng.normal() * 0.01};
        const double t = aniso_distance(a, x);
        CHECK(std::abs(aniso_residual(a, x, t)) <= 1e-12);
        CHECK(t == doctest::Approx(bisect_distance({2.5, 1.0, 1.5}, x)).epsilon(1e-12));
    }
}

TEST_CASE("closed form for a = (2,1) on a 101x101 grid") {
    AnisotropyVector a({2, 1});
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int k = 0; k <= 100; ++k) {
            const double x1 = -10.0 + 0.2 * i, x2 = -10.0 + 0.2 * k;
            worst = std::max(worst, std::abs(aniso_distance(a, std::vector<double>{x1, x2}) -
                                             closed_form_21(x1, x2)));
        }
    CHECK(worst <= 1e-10);
}

TEST_CASE("quasi-homogeneity, triangle inequality and sandwich bounds") {
    Rng rng(2024);
    const std::vector<AnisotropyVector> as{AnisotropyVector({1, 1}), AnisotropyVector({2, 1}),
                                           AnisotropyVector({2, 2, 1}), AnisotropyVector({1.5, 3.25})};
    for (const auto& a : as) {
        int bad_h = 0, bad_t = 0, bad_s = 0;
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
            if (aniso_distance(a, xy) > dx + aniso_distance(a, y) + 1e-10) ++bad_t;
            const auto br = aniso_bracket(a, x);
            if (br.lower > dx + 1e-10 || dx > br.upper + 1e-10) ++bad_s;
        }
        CHECK(bad_h == 0);
        CHECK(bad_t == 0);
        CHECK(bad_s == 0);
    }
}
