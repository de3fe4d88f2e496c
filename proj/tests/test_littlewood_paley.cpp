#include "doctest.h"

#include "anisoft/errors.hpp"
#include "anisoft/families.hpp"
#include "anisoft/littlewood_paley.hpp"

#include <cmath>
#include <numbers>

using namespace anisoft;
using std::numbers::pi;

namespace {

// Independent cutoff: 1 - S with S(x) = g(x) / (g(x) + g(1-x)), g = exp(-1/x).
double oracle_cutoff(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 1.5) return 0.0;
    const double x = 2.0 * (r - 1.0);
    const double g0 = std::exp(-1.0 / x), g1 = std::exp(-1.0 / (1.0 - x));
    return 1.0 - g0 / (g0 + g1);
}

double oracle_sum(double r, int levels) {
    double s = oracle_cutoff(r);
    for (int j = 1; j <= levels; ++j) s += oracle_cutoff(r / std::pow(2.0, j)) - oracle_cutoff(r / std::pow(2.0, j - 1));
    return s;
}

}  // namespace

TEST_CASE("cutoff profile") {
    BumpProfile b;
    CHECK(b(0.0) == 1.0);
    CHECK(b(1.0) == 1.0);
    CHECK(b(1.5) == 0.0);
    CHECK(b(7.0) == 0.0);
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double r = 1.0 + 0.5 * i / 1000.0;
        const double v = b(r);
        CHECK(v <= prev);
        CHECK(v >= 0.0);
        CHECK(std::abs(v - oracle_cutoff(r)) < 1e-14);
        prev = v;
    }
}

TEST_CASE("coarse grids are rejected with a resolution hint") {
    const auto g = GridSpec::cube(2, 2 * pi, 8);
    CHECK_THROWS_AS(build_partition(AnisotropyVector({2, 1}), g), ConfigError);
    try {
        build_partition(AnisotropyVector({2, 1}), g);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("minimum points per axis") != std::string::npos);
    }
    CHECK_NOTHROW(build_partition(AnisotropyVector({1, 1}), g));
}

TEST_CASE("partition of unity, corona support and overlap") {
    struct Case {
        AnisotropyVector a;
        GridSpec g;
    };
    const std::vector<Case> cases{{AnisotropyVector({1, 1}), GridSpec::cube(2, 2 * pi, 64)},
                                  {AnisotropyVector({2, 1}), GridSpec({2 * pi, 2 * pi}, {128, 32})},
                                  {AnisotropyVector({2, 2, 1}), GridSpec({2 * pi, 2 * pi, 2 * pi}, {32, 32, 16})}};
    for (const auto& c : cases) {
        const auto sys = build_partition(c.a, c.g);
        const int J = sys.levels();
        CHECK(J >= 3);
        const auto r = sys.radii();
        double dev = 0.0, dev_oracle = 0.0;
        int violations = 0, overlap = 0;
        for (std::size_t f = 0; f < c.g.size(); ++f) {
            double s = 0.0;
            int nonzero = 0, first = -1, last = -1;
            for (int j = 0; j <= J; ++j) {
                const double v = sys.symbol(j)[f];
                if (v < 0.0 || v > 1.0) ++violations;
                s += v;
                if (v > 0.0) {
                    ++nonzero;
                    if (first < 0) first = j;
                    last = j;
                }
                const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 1);
                const double hi = j == 0 ? 1.5 : 3.0 * std::ldexp(1.0, j - 1);
                if ((r[f] < lo || r[f] > hi) && v >= 1e-14) ++violations;
            }
            if (nonzero > 2 || last - first > 1) ++overlap;
            if (r[f] <= std::ldexp(1.0, J - 1)) {
                dev = std::max(dev, std::abs(s - 1.0));
                dev_oracle = std::max(dev_oracle, std::abs(oracle_sum(r[f], 60) - 1.0));
            }
        }
        CHECK(dev <= 1e-8);
        CHECK(dev_oracle <= 1e-8);
        CHECK(violations == 0);
        CHECK(overlap == 0);
    }
}

TEST_CASE("symbols inside the unit ball and at the origin") {
    const auto g = GridSpec::cube(2, 2 * pi, 32);
    const auto sys = build_partition(AnisotropyVector({2, 1}), g);
    CHECK(sys.symbol(0)[0] == 1.0);
    for (std::size_t f = 0; f < g.size(); ++f) {
        if (sys.radii()[f] > 1.0) continue;
        CHECK(sys.symbol(0)[f] == 1.0);
        for (int j = 1; j <= sys.levels(); ++j) CHECK(sys.symbol(j)[f] == 0.0);
    }
    CHECK_THROWS_AS(sys.symbol(sys.levels() + 1), UsageError);
    CHECK_THROWS_AS(sys.symbol(-1), UsageError);
}

TEST_CASE("apply_block on low-frequency data, single modes and reconstruction") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({2, 1});
    const auto sys = build_partition(a, g);
    Rng rng(77);

    auto low = random_band_limited(g, a, 1.0, rng);
    auto lowc = fft_forward(low);
    auto b0 = apply_block(sys, 0, lowc);
    auto b2 = apply_block(sys, 2, lowc);
    double e0 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e0 = std::max(e0, std::abs(b0[i] - low[i]));
    CHECK(e0 <= 1e-10 * low.max_abs());
    CHECK(b2.max_abs() <= 1e-12);
    CHECK_THROWS_AS(apply_block(sys, sys.levels() + 1, lowc), UsageError);

    // a mode at xi = (3, 2): |xi|_a lies between 2 and 4
    auto mode = GridFunction::from_function(g, [](auto x) { return std::polar(1.0, 3 * x[0] + 2 * x[1]); });
    auto mc = fft_forward(mode);
    const std::vector<double> xi{3, 2};
    const double r = aniso_distance(a, xi);
    for (int j = 0; j <= sys.levels(); ++j) {
        auto bj = apply_block(sys, j, mc);
        const double expect = lp_symbol(j, r);
        CHECK(std::abs(expect - oracle_cutoff(r / std::pow(2.0, j)) +
                       (j == 0 ? 0.0 : oracle_cutoff(r / std::pow(2.0, j - 1)))) < 1e-14);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(bj[i] - expect * mode[i]));
        CHECK(err < 1e-12);
    }

    const double top = std::ldexp(1.0, sys.levels() - 1);
    for (int t = 0; t < 20; ++t) {
        SpectralFunction uc(g);
        for (std::size_t f = 0; f < g.size(); ++f)
            if (sys.radii()[f] <= top) uc[f] = cplx(rng.normal(), rng.normal());
        auto u = fft_inverse(uc);
        GridFunction sum(g);
        for (int j = 0; j <= sys.levels(); ++j) sum += apply_block(sys, j, uc);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(sum[i] - u[i]));
        CHECK(err <= 1e-8 * u.max_abs());
    }

    auto real = random_band_limited(g, a, 5.0, rng);
    auto rc = fft_forward(real);
    for (int j = 0; j <= sys.levels(); ++j) {
        auto bj = apply_block(sys, j, rc);
        double im = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) im = std::max(im, std::abs(bj[i].imag()));
        CHECK(im < 1e-12 * real.max_abs());
    }
}

TEST_CASE("tail certification") {
    const auto g = GridSpec::cube(2, 2 * pi, 64);
    const AnisotropyVector a({1, 1});
    const auto sys = build_partition(a, g);
    Rng rng(3);
    auto ok = random_band_limited(g, a, std::ldexp(1.0, sys.levels() - 2), rng);
    CHECK(tail_fraction(sys, fft_forward(ok)) < 1e-28);
    CHECK_NOTHROW(certify_tail(sys, fft_forward(ok)));
    auto rough = GridFunction::from_function(g, [](auto x) { return cplx(x[0] < pi ? 1.0 : 0.0); });
    CHECK_THROWS_AS(certify_tail(sys, fft_forward(rough)), PreconditionError);
}
