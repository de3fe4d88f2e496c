#include "anisoft/families.hpp"

#include "anisoft/errors.hpp"

#include <cmath>
#include <numbers>

namespace anisoft {

FamilyDescriptor FamilyDescriptor::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("family must look like kind:count, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    FamilyDescriptor d;
    if (kind == "gaussians")
        d.kind = FamilyKind::gaussians;
    else if (kind == "modes")
        d.kind = FamilyKind::modes;
    else if (kind == "random-band-limited")
        d.kind = FamilyKind::random_band_limited;
    else
        throw UsageError("unknown family kind '" + kind + "'");
    try {
        std::size_t used = 0;
        d.count = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw UsageError("family count in '" + text + "' is not an integer");
    }
    if (d.count < 1) throw UsageError("family count must be positive");
    return d;
}

std::string FamilyDescriptor::to_string() const {
    const char* names[] = {"gaussians", "modes", "random-band-limited"};
    return std::string(names[static_cast<int>(kind)]) + ":" + std::to_string(count);
}

GridFunction random_band_limited(const GridSpec& spec, const AnisotropyVector& a, double radius, Rng& rng) {
    const std::size_t n = spec.dim();
    if (a.size() != n) throw UsageError("anisotropy and grid dimensions differ");
    std::vector<int> kmax(n);
    for (std::size_t j = 0; j < n; ++j) {
        kmax[j] = static_cast<int>(std::floor(std::pow(radius, a[j]) * spec.length(j) / (2 * std::numbers::pi)));
        if (kmax[j] >= spec.points(j) / 2)
            throw ConfigError("band radius " + std::to_string(radius) + " needs more than " +
                              std::to_string(spec.points(j)) + " points on axis " + std::to_string(j + 1));
    }

    SpectralFunction c(spec);
    std::vector<int> k(n);
    for (std::size_t j = 0; j < n; ++j) k[j] = -kmax[j];
    std::vector<double> xi(n);
    const double scale = spec.box_volume();
    while (true) {
        // Hermitian pairs: draw for the lexicographically positive half only.
        bool positive = false, zero = true;
        for (std::size_t j = n; j-- > 0;) {
            if (k[j] != 0) {
                positive = k[j] > 0;
                zero = false;
                break;
            }
        }
        for (std::size_t j = 0; j < n; ++j) xi[j] = 2 * std::numbers::pi * k[j] / spec.length(j);
        if ((positive || zero) && aniso_distance(a, xi) <= radius) {
            const double re = rng.normal();
            const double im = zero ? 0.0 : rng.normal();
            c.coeffs()[c.offset_of(k)] = scale * cplx(re, im);
            if (!zero) {
                std::vector<int> mk(k);
                for (auto& v : mk) v = -v;
                c.coeffs()[c.offset_of(mk)] = scale * cplx(re, -im);
            }
        }
        std::size_t j = 0;
        while (j < n && k[j] == kmax[j]) {
            k[j] = -kmax[j];
            ++j;
        }
        if (j == n) break;
        ++k[j];
    }
    auto u = fft_inverse(c);
    for (auto& v : u.samples()) v = v.real();
    return u;
}

double Gaussian::operator()(std::span<const double> x) const {
    double e = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double t = (x[j] - center[j]) / width[j];
        e += t * t;
    }
    return amplitude * std::exp(-e);
}

GridFunction Gaussian::sample(const GridSpec& spec) const {
    return GridFunction::from_function(spec, [this](std::span<const double> x) { return cplx((*this)(x)); });
}

Gaussian random_gaussian(const GridSpec& spec, Rng& rng, double w_lo, double w_hi) {
    Gaussian g;
    g.amplitude = rng.uniform(0.5, 2.0);
    for (std::size_t j = 0; j < spec.dim(); ++j) {
        const double L = spec.length(j);
        g.center.push_back(rng.uniform(0.42 * L, 0.58 * L));
        g.width.push_back(rng.uniform(w_lo, w_hi) * L);
    }
    return g;
}

GridFunction random_modes(const GridSpec& spec, const AnisotropyVector& a, double radius, int terms, Rng& rng) {
    const std::size_t n = spec.dim();
    std::vector<int> kmax(n);
    for (std::size_t j = 0; j < n; ++j) {
        kmax[j] = static_cast<int>(std::floor(std::pow(radius, a[j]) * spec.length(j) / (2 * std::numbers::pi)));
        if (kmax[j] >= spec.points(j) / 2)
            throw ConfigError("band radius " + std::to_string(radius) + " needs more than " +
                              std::to_string(spec.points(j)) + " points on axis " + std::to_string(j + 1));
    }
    struct Mode {
        std::vector<double> xi;
        double amp, phase;
    };
    std::vector<Mode> modes;
    std::vector<double> xi(n);
    while (static_cast<int>(modes.size()) < terms) {
        for (std::size_t j = 0; j < n; ++j)
            xi[j] = 2 * std::numbers::pi * rng.integer(-kmax[j], kmax[j]) / spec.length(j);
        if (aniso_distance(a, xi) > radius) continue;
        modes.push_back({xi, rng.uniform(0.5, 1.5), rng.uniform(0.0, 2 * std::numbers::pi)});
    }
    return GridFunction::from_function(spec, [&](std::span<const double> x) {
        double s = 0.0;
        for (const auto& m : modes) {
            double ph = m.phase;
            for (std::size_t j = 0; j < n; ++j) ph += m.xi[j] * x[j];
            s += m.amp * std::cos(ph);
        }
        return cplx(s);
    });
}

std::vector<GridFunction> make_family(const FamilyDescriptor& fam, const GridSpec& spec, const AnisotropyVector& a,
                                      double band_radius, std::uint64_t seed) {
    std::vector<GridFunction> out;
    out.reserve(fam.count);
    for (int i = 0; i < fam.count; ++i) {
        Rng rng(seed + static_cast<std::uint64_t>(i));
        switch (fam.kind) {
            case FamilyKind::gaussians:
                out.push_back(random_gaussian(spec, rng).sample(spec));
                break;
            case FamilyKind::modes:
                out.push_back(random_modes(spec, a, band_radius, 5, rng));
                break;
            case FamilyKind::random_band_limited:
                out.push_back(random_band_limited(spec, a, band_radius, rng));
                break;
        }
    }
    return out;
}

}  // namespace anisoft
