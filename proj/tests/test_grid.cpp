#include "doctest.h"

#include "anisoft/errors.hpp"
#include "anisoft/grid.hpp"
#include "anisoft/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace anisoft;
using std::numbers::pi;

namespace {

GridFunction random_band_limited(const GridSpec& spec, Rng& rng, int kmax) {
    SpectralFunction c(spec);
    std::vector<int> k(spec.dim());
    for (std::size_t f = 0; f < c.size(); ++f) {
        spec.unravel(f, k);
        bool ok = true;
        for (std::size_t j = 0; j < k.size(); ++j) ok = ok && std::abs(spec.wavenumber(j, k[j])) <= kmax;
        if (ok) c[f] = {rng.normal(), rng.normal()};
    }
    return fft_inverse(c);
}

// Direct O(N^n) evaluation of the interpolant.
cplx direct_sum(const SpectralFunction& u, std::span<const double> x) {
    const auto& spec = u.spec();
    std::vector<double> xi(spec.dim());
    cplx s = 0.0;
    for (std::size_t f = 0; f < u.size(); ++f) {
        spec.frequency_at(f, xi);
        double ph = 0.0;
        for (std::size_t j = 0; j < xi.size(); ++j) ph += xi[j] * x[j];
        s += u[f] * std::polar(1.0, ph);
    }
    return s / spec.box_volume();
}

}  // namespace

TEST_CASE("GridSpec validation and indexing") {
    CHECK_THROWS(GridSpec({1.0}, {7}));
    CHECK_THROWS(GridSpec({1.0}, {4}));
    CHECK_THROWS(GridSpec({-1.0}, {8}));
    CHECK_THROWS(GridSpec({1.0, 1.0}, {8}));
    GridSpec g({2 * pi, 4 * pi}, {8, 16});
    CHECK(g.size() == 128);
    CHECK(g.stride(0) == 1);
    CHECK(g.stride(1) == 8);
    CHECK(g.wavenumber(0, 4) == -4);
    CHECK(g.wavenumber(0, 3) == 3);
    CHECK(g.frequency(1, 1) == doctest::Approx(0.5));
    std::vector<int> idx(2);
    for (std::size_t f = 0; f < g.size(); ++f) {
        g.unravel(f, idx);
        CHECK(g.ravel(idx) == f);
    }
    CHECK(g.refined(2).points(1) == 32);
}

TEST_CASE("coefficients of DC and a pure mode") {
    const auto g = GridSpec::cube(2, 2 * pi, 16);
    auto one = GridFunction::from_function(g, [](auto) { return cplx(1.0); });
    auto c = fft_forward(one);
    const std::vector<int> zero{0, 0};
    CHECK(std::abs(c.at_wavenumber(zero) - 4 * pi * pi) < 1e-12);
    auto mode = GridFunction::from_function(g, [](auto x) { return std::polar(1.0, 3 * x[0] - 2 * x[1]); });
    auto cm = fft_forward(mode);
    const std::vector<int> k{3, -2};
    CHECK(std::abs(cm.at_wavenumber(k) - 4 * pi * pi) < 1e-11);
    double rest = 0.0;
    for (std::size_t f = 0; f < cm.size(); ++f)
        if (f != cm.offset_of(k)) rest = std::max(rest, std::abs(cm[f]));
    CHECK(rest < 1e-11);
}

TEST_CASE("forward/inverse round trip and Parseval") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        GridSpec g({1.0 + rng.uniform() * 5, 2.0 + rng.uniform()}, {16, 24});
        std::vector<cplx> s(g.size());
        for (auto& v : s) v = {rng.normal(), rng.normal()};
        GridFunction u(g, s);
        auto c = fft_forward(u);
        auto back = fft_inverse(c);
        double err = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(back[i] - u[i]));
        CHECK(err < 1e-12);
        CHECK(spectral_energy(c) == doctest::Approx(grid_energy(u)).epsilon(1e-12));
    }
}

TEST_CASE("lattice shift multiplies coefficients by a phase") {
    Rng rng(8);
    const auto g = GridSpec::cube(2, 3.0, 16);
    auto u = random_band_limited(g, rng, 8);
    const int shift = 3;
    GridFunction v(g);
    std::vector<int> idx(2);
    for (std::size_t f = 0; f < g.size(); ++f) {
        g.unravel(f, idx);
        idx[0] = (idx[0] + shift) % 16;
        v[f] = u[g.ravel(idx)];
    }
    auto cu = fft_forward(u), cv = fft_forward(v);
    std::vector<double> xi(2);
    double err = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        g.frequency_at(f, xi);
        err = std::max(err, std::abs(cv[f] - cu[f] * std::polar(1.0, xi[0] * shift * g.spacing(0))));
    }
    CHECK(err < 1e-11);
}

TEST_CASE("resample: pure mode, lattice nodes, direct sum") {
    const auto g = GridSpec::cube(2, 2 * pi, 16);
    auto mode = GridFunction::from_function(g, [](auto x) { return std::polar(1.0, 2 * x[0] + 5 * x[1]); });
    auto cm = fft_forward(mode);
    std::vector<AnisoPoint> pts{{0.1, 0.2}, {1.234, -7.5}, {100.0, 3.3}};
    auto vals = resample(cm, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(std::abs(vals[i] - std::polar(1.0, 2 * pts[i][0] + 5 * pts[i][1])) < 1e-11);

    Rng rng(3);
    GridSpec g3({2.0, 3.0, 1.5}, {8, 12, 10});
    std::vector<cplx> s(g3.size());
    for (auto& v : s) v = {rng.normal(), rng.normal()};
    GridFunction u(g3, s);
    auto c = fft_forward(u);
    std::vector<AnisoPoint> nodes;
    std::vector<std::size_t> flats;
    for (std::size_t f = 0; f < g3.size(); f += 37) {
        AnisoPoint x(3);
        g3.point_at(f, x);
        nodes.push_back(x);
        flats.push_back(f);
    }
    auto at_nodes = resample(c, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(std::abs(at_nodes[i] - u[flats[i]]) < 1e-11);

    std::vector<AnisoPoint> rnd;
    for (int i = 0; i < 40; ++i) rnd.push_back({rng.uniform(-1, 3), rng.uniform(0, 3), rng.uniform(-2, 2)});
    auto r = resample(c, rnd);
    for (std::size_t i = 0; i < rnd.size(); ++i) CHECK(std::abs(r[i] - direct_sum(c, rnd[i])) < 1e-11);
}

TEST_CASE("PartialInterpolant agrees with full resampling") {
    Rng rng(12);
    GridSpec g({2.0, 3.0, 1.5}, {8, 12, 10});
    auto u = random_band_limited(g, rng, 6);
    auto c = fft_forward(u);
    for (const std::vector<bool>& mask : {std::vector<bool>{true, false, false},
                                          std::vector<bool>{false, true, true},
                                          std::vector<bool>{true, true, true}}) {
        PartialInterpolant pi_(c, mask);
        for (int t = 0; t < 30; ++t) {
            std::vector<int> idx{rng.integer(0, 7), rng.integer(0, 11), rng.integer(0, 9)};
            AnisoPoint x(3);
            for (std::size_t j = 0; j < 3; ++j)
                x[j] = mask[j] ? rng.uniform(0, g.length(j)) : idx[j] * g.spacing(j);
            const std::vector<AnisoPoint> one{x};
            CHECK(std::abs(pi_(x, idx) - resample(c, one)[0]) < 1e-11);
        }
    }
}

TEST_CASE("binary and CSV I/O") {
    Rng rng(4);
    GridSpec g({2 * pi, 1.0 / 3}, {8, 10});
    std::vector<cplx> s(g.size());
    for (auto& v : s) v = {rng.normal(), rng.normal()};
    GridFunction u(g, s);
    std::stringstream ss;
    write_grid(ss, u);
    auto v = read_grid(ss);
    CHECK(v.spec() == g);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(v[i] == u[i]);

    std::ostringstream csv;
    write_grid_csv(csv, u);
    const auto text = csv.str();
    CHECK(text.rfind("x1,x2,re,im\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(g.size() + 1));

    std::stringstream bad("2;8;1.0\n");
    CHECK_THROWS(read_grid(bad));
}

TEST_CASE("energy_fraction") {
    const auto g = GridSpec::cube(1, 2 * pi, 16);
    auto u = GridFunction::from_function(g, [](auto x) { return std::polar(1.0, x[0]) + 2.0 * std::polar(1.0, 3 * x[0]); });
    auto c = fft_forward(u);
    CHECK(energy_fraction(c, [](auto xi) { return std::abs(xi[0]) > 2; }) == doctest::Approx(0.8));
}
