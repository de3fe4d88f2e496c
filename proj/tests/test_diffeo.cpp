#include "doctest.h"

#include "anisoft/diffeo.hpp"
#include "anisoft/errors.hpp"
#include "anisoft/families.hpp"
#include "anisoft/jet.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/random.hpp"

#include <cmath>
#include <numbers>

using namespace anisoft;
using std::numbers::pi;

namespace {

std::vector<Gaussian> bumps(std::size_t n, double L, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Gaussian> out;
    for (int i = 0; i < count; ++i) {
        Gaussian g;
        g.amplitude = rng.uniform(0.5, 1.5);
        for (std::size_t l = 0; l < n; ++l) {
            g.center.push_back(0.5 * L + rng.uniform(-1.0, 1.0));
            g.width.push_back(rng.uniform(0.5, 0.8));
        }
        out.push_back(g);
    }
    return out;
}

std::vector<GridFunction> sample_all(const std::vector<Gaussian>& gs, const GridSpec& spec) {
    std::vector<GridFunction> out;
    for (const auto& g : gs) out.push_back(g.sample(spec));
    return out;
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<Diffeomorphism> catalogue() {
    const double c = 2.0 * pi;
    std::vector<Diffeomorphism> maps;
    maps.push_back(Diffeomorphism::translation({0.3, -0.7}));
    maps.push_back(Diffeomorphism::distortion(2, {0}, {c}, 4.0, 0.8, {1.0}));
    maps.push_back(Diffeomorphism::distortion(2, {0, 1}, {c, c + 0.3}, 3.0, 0.6, {0.6, -0.8}));
    maps.push_back(Diffeomorphism::shear(2, 0, {1}, {c}, 2.5, 0.9));
    maps.push_back(Diffeomorphism::twist(2, 0, 1, {c, c}, 3.0, 0.6));
    maps.push_back(Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::distortion(2, {0}, {c}, 4.0, 0.8, {1.0}),
                                                      Diffeomorphism::distortion(2, {1}, {c}, 3.5, -0.6, {1.0})}));
    return maps;
}

}  // namespace

TEST_CASE("jets carry derivatives through arithmetic and elementary functions") {
    auto sp = JetSpace::get(2, 4);
    CHECK(sp->size() == 15);
    const double x0 = 0.3, y0 = -0.4;
    const Jet x = Jet::variable(sp, 0, x0), y = Jet::variable(sp, 1, y0);
    const Jet f = exp(x * y);
    const int a22[2] = {2, 2};
    // d^2/dx^2 d^2/dy^2 e^{xy} = (2 + 4xy + x^2 y^2) e^{xy}
    const double p = x0 * y0;
    CHECK(f.derivative(a22) == doctest::Approx((2.0 + 4.0 * p + p * p) * std::exp(p)).epsilon(1e-13));
    const Jet g = sin(x) * cos(y) / (2.0 + x);
    const int a10[2] = {1, 0}, a03[2] = {0, 3};
    const double dgx = (std::cos(x0) * (2.0 + x0) - std::sin(x0)) / ((2.0 + x0) * (2.0 + x0)) * std::cos(y0);
    CHECK(g.derivative(a10) == doctest::Approx(dgx).epsilon(1e-13));
    CHECK(g.derivative(a03) == doctest::Approx(std::sin(x0) * std::sin(y0) / (2.0 + x0)).epsilon(1e-13));
    const int bad[2] = {3, 2};
    CHECK_THROWS_AS(sp->find(bad), UsageError);
}

TEST_CASE("kinds follow the structural form") {
    const double c = 2.0 * pi;
    CHECK(Diffeomorphism::identity(3).kind() == DiffeoKind::identity);
    CHECK(Diffeomorphism::translation({0.0, 0.0}).kind() == DiffeoKind::identity);
    CHECK(Diffeomorphism::translation({0.1, 0.0}).kind() == DiffeoKind::translation);
    CHECK(Diffeomorphism::distortion(2, {0}, {c}, 2.0, 0.3, {1.0}).kind() == DiffeoKind::structured);
    CHECK(Diffeomorphism::distortion(2, {0, 1}, {c, c}, 2.0, 0.3, {1.0, 0.0}).kind() == DiffeoKind::general);
    CHECK(Diffeomorphism::shear(3, 0, {1}, {1.0}, 0.5, 0.1).kind() == DiffeoKind::structured);
    CHECK(Diffeomorphism::shear(2, 0, {1}, {1.0}, 0.5, 0.1).kind() == DiffeoKind::general);
    CHECK(Diffeomorphism::twist(3, 0, 1, {1.0, 1.0}, 0.5, 0.3).kind() == DiffeoKind::structured);
    CHECK(Diffeomorphism::twist(3, 0, 2, {1.0, 1.0}, 0.5, 0.3).kind() == DiffeoKind::general);
    CHECK_THROWS_AS(Diffeomorphism::distortion(2, {0}, {c}, 1.0, 2.0, {1.0}), DomainError);
    CHECK_THROWS_AS(Diffeomorphism::shear(3, 1, {1}, {1.0}, 0.5, 0.1), UsageError);
    CHECK_THROWS_AS(Diffeomorphism::block({{0, 2}, {1}}, {Diffeomorphism::identity(3), Diffeomorphism::identity(3)}),
                    UsageError);
    CHECK_THROWS_AS(Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::distortion(2, {1}, {c}, 2.0, 0.3, {1.0}),
                                                       Diffeomorphism::identity(2)}),
                    UsageError);
}

TEST_CASE("forward o inverse is the identity on 1000 points") {
    auto maps = catalogue();
    maps.push_back(Diffeomorphism::twist(3, 0, 1, {2.0, 2.0}, 1.5, 1.2));
    maps.push_back(Diffeomorphism::shear(3, 0, {1, 2}, {2.0, 2.0}, 1.5, 0.7));
    for (const auto& base : maps) {
        for (const auto& sigma : {base, base.inverted()}) {
            CAPTURE(sigma.description());
            Rng rng(11);
            double worst = 0.0;
            for (int k = 0; k < 1000; ++k) {
                std::vector<double> y(sigma.dim());
                for (auto& v : y) v = (sigma.dim() == 2 ? 2.0 * pi : 2.0) + rng.uniform(-3.2, 3.2);
                const auto x = sigma.inverse(y);
                const auto back = sigma(x);
                for (std::size_t l = 0; l < y.size(); ++l) worst = std::max(worst, std::abs(back[l] - y[l]));
            }
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("inverse jets agree with finite differences") {
    const double c = 2.0 * pi;
    const auto sigma = Diffeomorphism::distortion(2, {0, 1}, {c, c}, 3.0, 0.6, {0.6, -0.8}).inverted();
    const std::vector<double> y = {c + 0.8, c - 0.5};
    const auto J = sigma.jet(y, 4);
    // Second derivatives from central differences of the first-order jet coefficients.
    const double h = 1e-4;
    const int a11[2] = {1, 1}, a20[2] = {2, 0}, e1[2] = {1, 0}, e2[2] = {0, 1};
    for (std::size_t j = 0; j < 2; ++j) {
        auto first = [&](double dx, double dy, const int* e) {
            const std::vector<double> p = {y[0] + dx, y[1] + dy};
            return sigma.jet(p, 1)[j].derivative(std::span<const int>(e, 2));
        };
        const double fd20 = (first(h, 0, e1) - first(-h, 0, e1)) / (2 * h);
        const double fd11 = (first(0, h, e1) - first(0, -h, e1)) / (2 * h);
        CHECK(J[j].derivative(a20) == doctest::Approx(fd20).epsilon(1e-6));
        CHECK(J[j].derivative(a11) == doctest::Approx(fd11).epsilon(1e-6));
        CHECK(first(0, 0, e2) == doctest::Approx(J[j].derivative(e2)).epsilon(1e-14));
    }
    // D tau (sigma(x)) D sigma(x) = I.
    const auto x = sigma(y);
    const auto Js = sigma.inverted().jet(x, 1);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c2 = 0; c2 < 2; ++c2) {
            double v = 0.0;
            for (std::size_t k = 0; k < 2; ++k) {
                const int ek[2] = {k == 0, k == 1}, ec[2] = {c2 == 0, c2 == 1};
                v += J[r].derivative(ek) * Js[k].derivative(ec);
            }
            CHECK(v == doctest::Approx(r == c2 ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("constants") {
    SUBCASE("identity pattern") {
        for (const auto& sigma : {Diffeomorphism::identity(3), Diffeomorphism::translation({0.5, 0.0, -1.0})}) {
            const auto k = diffeo_constants(sigma);
            CHECK(k.alphas.size() == 34);
            for (std::size_t a = 0; a < k.alphas.size(); ++a)
                for (std::size_t j = 0; j < 3; ++j) {
                    int order = 0;
                    for (int e : k.alphas[a]) order += e;
                    const double expect = order == 1 && k.alphas[a][j] == 1 ? 1.0 : 0.0;
                    CHECK(k.component_sup[j][a] == expect);
                }
            CHECK(k.c_sigma == 1.0);
            CHECK(k.c_tau == 1.0);
        }
    }
    SUBCASE("shears and twists have unit determinant") {
        for (const auto& sigma : {Diffeomorphism::shear(3, 0, {1, 2}, {2.0, 2.0}, 1.0, 0.3),
                                  Diffeomorphism::shear(2, 1, {0}, {2.0}, 1.0, 0.3)}) {
            const auto k = diffeo_constants(sigma);
            CHECK(k.c_sigma == 1.0);
            CHECK(k.c_tau == 1.0);
        }
        const auto k = diffeo_constants(Diffeomorphism::twist(3, 0, 1, {2.0, 2.0}, 1.0, 0.8));
        CHECK(k.c_sigma == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(k.c_tau == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("distortion floor") {
        // Largest admissible eps for width 1 and unit direction, from the slope table.
        const double w = 1.0;
        double eps = 2.0;
        for (;;) {
            try {
                (void)Diffeomorphism::distortion(2, {0, 1}, {2.0, 2.0}, w, eps, {1.0, 0.0});
                break;
            } catch (const DomainError&) {
                eps *= 0.999;
            }
        }
        const auto k = diffeo_constants(Diffeomorphism::distortion(2, {0, 1}, {2.0, 2.0}, w, eps, {1.0, 0.0}));
        CHECK(k.c_sigma >= 0.5);
        CHECK(k.c_sigma <= 0.52);
        CHECK(k.c_tau > 0.0);
        for (double v : k.C_alpha) CHECK(std::isfinite(v));
    }
    SUBCASE("derivative table matches finite differences") {
        // 1-D profile along x_1: sigma_1 = x_1 + eps B((x_1 - c)^2 / w^2); sup |d/dx_1 sigma_1| on the lattice.
        const double eps = 0.2, w = 1.0, c = 2.0;
        const auto k = diffeo_constants(Diffeomorphism::distortion(2, {0}, {c}, w, eps, {1.0}));
        double sup = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double x = c - w + (i + 0.5) * 2.0 * w / 32;
            auto s1 = [&](double t) {
                const double u = (t - c) * (t - c) / (w * w);
                return t + (u < 1 ? eps * std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0);
            };
            const double h = 1e-5;
            sup = std::max(sup, std::abs((s1(x + h) - s1(x - h)) / (2 * h)));
        }
        CHECK(k.C_alpha[0] == doctest::Approx(sup).epsilon(1e-8));
    }
}

TEST_CASE("composition oracles") {
    const double L = 4.0 * pi, c = 2.0 * pi;
    const GridSpec g = GridSpec::cube(2, L, 128);
    Gaussian bump;
    bump.center = {c + 0.4, c - 0.3};
    bump.width = {0.7, 0.6};
    const GridFunction f = bump.sample(g);
    const SpectralFunction fh = fft_forward(f);

    SUBCASE("identity") { CHECK(max_diff(compose(fh, Diffeomorphism::identity(2)), f) <= 1e-12); }
    SUBCASE("lattice translation shifts samples and keeps every norm") {
        const double h = g.spacing(0);
        const auto tr = Diffeomorphism::translation({5 * h, -3 * h});
        const GridFunction moved = compose(fh, tr);
        double worst = 0.0;
        for (int i1 = 0; i1 < 128; ++i1)
            for (int i0 = 0; i0 < 128; ++i0)
                worst = std::max(worst, std::abs(moved[i0 + 128 * i1] - f[(i0 + 5) % 128 + 128 * ((i1 + 125) % 128)]));
        CHECK(worst <= 1e-12);
        const SpaceParams params{1.0, AnisotropyVector({2, 1}), IntegrabilityVector({2.0, 1.5}, 2.0)};
        const auto sys = build_partition(params.a, g);
        CHECK(f_norm(moved, params, sys) == doctest::Approx(f_norm(f, params, sys)).epsilon(1e-10));
    }
    SUBCASE("closed-form oracles") {
        for (const auto& sigma : catalogue()) {
            CAPTURE(sigma.description());
            const GridFunction got = compose(fh, sigma);
            const GridFunction want = GridFunction::from_function(g, [&](auto x) { return cplx(bump(sigma(x))); });
            CHECK(max_diff(got, want) <= 1e-9);
        }
    }
    SUBCASE("round trip") {
        for (const auto& sigma : catalogue()) {
            CAPTURE(sigma.description());
            const GridFunction there = compose(fh, sigma);
            const GridFunction back = compose(fft_forward(there), sigma.inverted());
            CHECK(max_diff(back, f) / f.max_abs() <= 1e-8);
        }
    }
    SUBCASE("support margin") {
        const auto near_edge = Diffeomorphism::distortion(2, {0}, {1.0}, 0.9, 0.1, {1.0});
        CHECK_THROWS_AS(compose(fh, near_edge), PreconditionError);
        const auto shear_ok = Diffeomorphism::shear(2, 1, {0}, {c}, 2.0, 3.0);  // moves x_2 across the edge
        CHECK_NOTHROW(compose(fh, shear_ok));
    }
}

TEST_CASE("composition in three dimensions") {
    const GridSpec g = GridSpec::cube(3, 4.0, 32);
    Gaussian bump;
    bump.center = {2.1, 1.9, 2.0};
    bump.width = {0.45, 0.5, 0.55};
    const SpectralFunction fh = fft_forward(bump.sample(g));
    for (const auto& sigma : {Diffeomorphism::twist(3, 0, 1, {2.0, 2.0}, 1.4, 0.5),
                              Diffeomorphism::shear(3, 0, {1}, {2.0}, 1.2, 0.3)}) {
        const GridFunction got = compose(fh, sigma);
        const GridFunction want = GridFunction::from_function(g, [&](auto x) { return cplx(bump(sigma(x))); });
        CHECK(max_diff(got, want) <= 1e-6);
    }
}

TEST_CASE("hypothesis flags") {
    const auto shear3 = Diffeomorphism::shear(3, 0, {1}, {2.0}, 1.0, 0.2);
    const auto mix = Diffeomorphism::twist(3, 0, 2, {2.0, 2.0}, 1.0, 0.2);
    const SpaceParams ok{1.5, AnisotropyVector({2, 2, 1}), IntegrabilityVector({2.0, 2.0, 4.0}, 2.0)};
    const SpaceParams bad_a{1.5, AnisotropyVector({2, 1, 1}), IntegrabilityVector({2.0, 2.0, 4.0}, 2.0)};
    const SpaceParams bad_p{1.5, AnisotropyVector({2, 2, 1}), IntegrabilityVector({2.0, 3.0, 4.0}, 2.0)};
    CHECK(invariance_hypotheses(shear3, ok));
    CHECK_FALSE(invariance_hypotheses(shear3, bad_a));
    CHECK_FALSE(invariance_hypotheses(shear3, bad_p));
    CHECK_FALSE(invariance_hypotheses(mix, ok));
    CHECK(invariance_hypotheses(Diffeomorphism::identity(3), bad_p));
    CHECK_FALSE(invariance_hypotheses(Diffeomorphism::translation({0.0, 0.0, 0.1}), ok));
    const auto blk = Diffeomorphism::block(
        {{0, 1}, {2}}, {Diffeomorphism::twist(3, 0, 1, {2.0, 2.0}, 1.0, 0.2), Diffeomorphism::identity(3)});
    CHECK(invariance_hypotheses(blk, ok));
    CHECK_FALSE(invariance_hypotheses(blk, bad_p));
}

TEST_CASE("invariance experiment") {
    const double L = 4.0 * pi;
    const GridSpec g = GridSpec::cube(2, L, 128);
    const auto gs = bumps(2, L, 10, 3);
    const auto family = sample_all(gs, g);
    const std::vector<SpaceParams> points = {
        {1.0, AnisotropyVector({1, 1}), IntegrabilityVector({2.0, 2.0}, 2.0)},
        {0.5, AnisotropyVector({2, 1}), IntegrabilityVector({1.5, 3.0}, 1.0)},
    };

    SUBCASE("identity and lattice translations") {
        const double h = g.spacing(0);
        for (const auto& sigma : {Diffeomorphism::identity(2), Diffeomorphism::translation({3 * h, 0.0}),
                                  Diffeomorphism::translation({3 * h, -7 * h})}) {
            const auto t = invariance_experiment(family, sigma, points);
            CHECK(t.rows.size() == 20);
            for (const auto& r : t.rows) {
                CHECK(r.hypothesis_ok == !sigma.moved()[1]);
                CHECK(std::abs(r.ratio - 1.0) <= 1e-10);
            }
        }
    }
    SUBCASE("doubling stability") {
        const GridSpec fine = g.refined(2);
        const auto fine_family = sample_all(gs, fine);
        for (const auto& sigma : {Diffeomorphism::distortion(2, {0}, {2.0 * pi}, 2.5, 0.5, {1.0}),
                                  Diffeomorphism::translation({0.37, 0.0})}) {
            const auto coarse = invariance_experiment(family, sigma, points);
            const auto dense = invariance_experiment(fine_family, sigma, points);
            for (std::size_t p = 0; p < points.size(); ++p) {
                CHECK(coarse.bands[p].count == 10);
                CHECK(dense.bands[p].min == doctest::Approx(coarse.bands[p].min).epsilon(0.2));
                CHECK(dense.bands[p].max == doctest::Approx(coarse.bands[p].max).epsilon(0.2));
            }
            for (const auto& r : dense.rows) CHECK(r.hypothesis_ok);
        }
    }
    SUBCASE("non-compact members are refused") {
        std::vector<GridFunction> wide = {GridFunction::from_function(g, [](auto) { return cplx(1.0); })};
        CHECK_THROWS_AS(invariance_experiment(wide, Diffeomorphism::identity(2), points), PreconditionError);
    }
}

TEST_CASE("block invariance") {
    const double L = 4.0 * pi, c = 2.0 * pi;
    const GridSpec g = GridSpec::cube(2, L, 128);
    const auto family = sample_all(bumps(2, L, 8, 5), g);
    const SpaceParams params{1.0, AnisotropyVector({2, 1}), IntegrabilityVector({2.0, 3.0}, 2.0)};

    const auto both_id = Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::identity(2), Diffeomorphism::identity(2)});
    for (double r : block_invariance_experiment(family, both_id, params).composite.ratios)
        CHECK(std::abs(r - 1.0) <= 1e-12);

    const double h = g.spacing(0);
    const auto tr = Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::translation({4 * h, 0.0}), Diffeomorphism::identity(2)});
    for (double r : block_invariance_experiment(family, tr, params).composite.ratios)
        CHECK(std::abs(r - 1.0) <= 1e-10);

    const auto two = Diffeomorphism::block({{0}, {1}}, {Diffeomorphism::distortion(2, {0}, {c}, 2.5, 0.5, {1.0}),
                                                        Diffeomorphism::distortion(2, {1}, {c}, 2.0, -0.4, {1.0})});
    const auto rep = block_invariance_experiment(family, two, params);
    CHECK(rep.factors.size() == 2);
    CHECK(rep.within_bound);
    CHECK(rep.composite.max <= 1.1 * rep.bound);

    CHECK_THROWS_AS(block_invariance_experiment(family, Diffeomorphism::identity(2), params), UsageError);
    const GridSpec g3 = GridSpec::cube(3, 4.0, 16);
    const auto blk3 = Diffeomorphism::block({{0, 1}, {2}}, {Diffeomorphism::identity(3), Diffeomorphism::identity(3)});
    const SpaceParams mixed{1.0, AnisotropyVector({1, 1, 1}), IntegrabilityVector({1.0, 2.0, 2.0}, 2.0)};
    std::vector<GridFunction> none;
    CHECK_THROWS_AS(block_invariance_experiment(none, blk3, mixed), PreconditionError);
}

TEST_CASE("lift route agrees with the direct negative-smoothness band") {
    const double L = 4.0 * pi;
    const GridSpec g = GridSpec::cube(2, L, 128);
    const auto family = sample_all(bumps(2, L, 10, 9), g);
    const auto sigma = Diffeomorphism::distortion(2, {0}, {2.0 * pi}, 2.5, 0.25, {1.0});
    const SpaceParams params{-1.0, AnisotropyVector({1, 1}), IntegrabilityVector({2.0, 2.0}, 2.0)};
    const auto rep = lift_route_experiment(family, sigma, params, 2.0);
    CAPTURE(rep.direct.min);
    CAPTURE(rep.direct.max);
    CAPTURE(rep.lifted.min);
    CAPTURE(rep.lifted.max);
    CHECK(rep.consistent);
}

TEST_CASE("parsing") {
    const double L[3] = {4.0, 4.0, 4.0};
    const auto s = parse_diffeomorphism("shear:eps=0.1", L);
    CHECK(s.kind() == DiffeoKind::structured);
    const auto d = parse_diffeomorphism("distortion:eps=0.2,center=2,2,width=1", L);
    CHECK(d.kind() == DiffeoKind::structured);
    CHECK(d.support().lo[0] == 1.0);
    CHECK(parse_diffeomorphism("twist:axes=1,3", L).kind() == DiffeoKind::general);
    CHECK(parse_diffeomorphism("translation:shift=0.1,0,0", L).kind() == DiffeoKind::translation);
    CHECK_THROWS_WITH_AS(parse_diffeomorphism("shear:epsilon=0.1", L), doctest::Contains("epsilon"), UsageError);
    CHECK_THROWS_WITH_AS(parse_diffeomorphism("shear:eps=abc", L), doctest::Contains("eps"), UsageError);
    CHECK_THROWS_AS(parse_diffeomorphism("rotation", L), UsageError);
}
