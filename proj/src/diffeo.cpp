#include "anisoft/diffeo.hpp"

#include "anisoft/errors.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/local_means.hpp"
#include "anisoft/multipliers.hpp"
#include "anisoft/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace anisoft {

std::string to_string(DiffeoKind kind) {
    switch (kind) {
        case DiffeoKind::identity: return "identity";
        case DiffeoKind::translation: return "translation";
        case DiffeoKind::structured: return "structured";
        case DiffeoKind::general: return "general";
        case DiffeoKind::block: return "block";
    }
    return "unknown";
}

bool SupportBox::contains(std::span<const double> x) const {
    for (std::size_t l = 0; l < bounded.size(); ++l)
        if (bounded[l] && !(x[l] > lo[l] && x[l] < hi[l])) return false;
    return true;
}

class DiffeoMap {
public:
    virtual ~DiffeoMap() = default;
    virtual void forward(std::span<const double> x, std::span<double> y) const = 0;
    virtual void forward(std::span<const Jet> x, std::span<Jet> y) const = 0;
    virtual void inverse(std::span<const double> y, std::span<double> x) const = 0;
    virtual void inverse(std::span<const Jet> y, std::span<Jet> x) const = 0;
};

namespace {

template <class Derived>
class MapBase : public DiffeoMap {
public:
    void forward(std::span<const double> x, std::span<double> y) const override { self().apply(x, y); }
    void forward(std::span<const Jet> x, std::span<Jet> y) const override { self().apply(x, y); }
    void inverse(std::span<const double> y, std::span<double> x) const override { self().apply_inverse(y, x); }
    void inverse(std::span<const Jet> y, std::span<Jet> x) const override { self().apply_inverse(y, x); }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

template <class T>
T zero_like(const T& ref) {
    return ref * 0.0;
}

// B(u) = exp(1 - 1/(1 - u)) on u < 1.
template <class T>
T profile(const T& u) {
    using std::exp;
    if (value_of(u) >= 1.0) return zero_like(u);
    return exp(1.0 - 1.0 / (1.0 - u));
}

// B'(u) = -B(u) / (1 - u)^2.
template <class T>
T profile_slope(const T& u) {
    if (value_of(u) >= 1.0) return zero_like(u);
    const T d = 1.0 - u;
    return -profile(u) / (d * d);
}

// max_r |B'(r^2)| 2r on [0, 1], sampled densely.
double radial_slope_max() {
    static const double value = [] {
        double m = 0.0;
        const int samples = 200000;
        for (int i = 1; i < samples; ++i) {
            const double r = static_cast<double>(i) / samples;
            m = std::max(m, std::abs(profile_slope(r * r)) * 2.0 * r);
        }
        return m;
    }();
    return value;
}

template <class T>
T squared_radius(std::span<const T> x, const std::vector<std::size_t>& axes, const std::vector<double>& c, double w) {
    T u = zero_like(x[0]);
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const T d = (x[axes[i]] - c[i]) / w;
        u += d * d;
    }
    return u;
}

class IdentityMap final : public MapBase<IdentityMap> {
public:
    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        std::copy(x.begin(), x.end(), y.begin());
    }
    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        std::copy(y.begin(), y.end(), x.begin());
    }
};

class TranslationMap final : public MapBase<TranslationMap> {
public:
    explicit TranslationMap(std::vector<double> shift) : shift_(std::move(shift)) {}
    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        for (std::size_t l = 0; l < x.size(); ++l) y[l] = x[l] + shift_[l];
    }
    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        for (std::size_t l = 0; l < y.size(); ++l) x[l] = y[l] - shift_[l];
    }

private:
    std::vector<double> shift_;
};

class DistortionMap final : public MapBase<DistortionMap> {
public:
    DistortionMap(std::vector<std::size_t> axes, std::vector<double> c, double w, double eps, std::vector<double> v)
        : axes_(std::move(axes)), c_(std::move(c)), w_(w), eps_(eps), v_(std::move(v)) {}

    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        std::copy(x.begin(), x.end(), y.begin());
        const T u = squared_radius(x, axes_, c_, w_);
        if (value_of(u) >= 1.0) return;
        const T b = profile(u) * eps_;
        for (std::size_t i = 0; i < axes_.size(); ++i) y[axes_[i]] += b * v_[i];
    }

    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        std::copy(y.begin(), y.end(), x.begin());
        std::vector<double> yv(y.size());
        for (std::size_t l = 0; l < y.size(); ++l) yv[l] = value_of(y[l]);
        if (squared_radius<double>(yv, axes_, c_, w_) >= 1.0) return;
        const double t0 = solve(yv);
        if constexpr (std::is_same_v<T, double>) {
            for (std::size_t i = 0; i < axes_.size(); ++i) x[axes_[i]] = y[axes_[i]] - t0 * v_[i];
        } else {
            // Newton on jets doubles the correct order per step: 1, 2, 4, 8.
            T t = zero_like(y[0]) + t0;
            std::vector<T> p(y.begin(), y.end());
            for (int it = 0; it < 3; ++it) {
                T g = zero_like(t), dg = zero_like(t);
                residual(std::span<const T>(y), t, p, g, dg);
                t -= g / dg;
            }
            for (std::size_t i = 0; i < axes_.size(); ++i) x[axes_[i]] = y[axes_[i]] - t * v_[i];
        }
    }

private:
    // g(t) = t - eps B(u(y - t v)) and g'(t) = 1 + eps grad B . v at x = y - t v.
    template <class T>
    void residual(std::span<const T> y, const T& t, std::vector<T>& p, T& g, T& dg) const {
        for (std::size_t i = 0; i < axes_.size(); ++i) p[axes_[i]] = y[axes_[i]] - t * v_[i];
        const T u = squared_radius(std::span<const T>(p), axes_, c_, w_);
        T dir = zero_like(t);
        for (std::size_t i = 0; i < axes_.size(); ++i) dir += (p[axes_[i]] - c_[i]) * (2.0 * v_[i] / (w_ * w_));
        g = t - profile(u) * eps_;
        dg = 1.0 + profile_slope(u) * dir * eps_;
    }

    double solve(std::span<const double> y) const {
        double lo = std::min(0.0, eps_), hi = std::max(0.0, eps_);
        std::vector<double> p(y.begin(), y.end());
        double g = 0.0, dg = 1.0;
        double t = std::clamp(eps_ * profile(squared_radius<double>(y, axes_, c_, w_)), lo, hi);
        for (int it = 0; it < 50; ++it) {
            residual<double>(y, t, p, g, dg);
            if (g > 0.0) hi = std::min(hi, t);
            else lo = std::max(lo, t);
            double next = t - g / dg;
            if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
            const bool done = std::abs(g) <= 1e-12;
            t = next;
            if (done) return t;
        }
        residual<double>(y, t, p, g, dg);
        if (!(std::abs(g) <= 1e-12)) throw DomainError("distortion inverse did not converge in 50 Newton steps");
        return t;
    }

    std::vector<std::size_t> axes_;
    std::vector<double> c_;
    double w_;
    double eps_;
    std::vector<double> v_;
};

class ShearMap final : public MapBase<ShearMap> {
public:
    ShearMap(std::size_t target, std::vector<std::size_t> sources, std::vector<double> c, double w, double eps)
        : target_(target), sources_(std::move(sources)), c_(std::move(c)), w_(w), eps_(eps) {}

    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        shift(x, y, eps_);
    }
    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        shift(y, x, -eps_);
    }

private:
    template <class T>
    void shift(std::span<const T> x, std::span<T> y, double e) const {
        std::copy(x.begin(), x.end(), y.begin());
        const T u = squared_radius(x, sources_, c_, w_);
        if (value_of(u) >= 1.0) return;
        y[target_] += profile(u) * e;
    }

    std::size_t target_;
    std::vector<std::size_t> sources_;
    std::vector<double> c_;
    double w_;
    double eps_;
};

class TwistMap final : public MapBase<TwistMap> {
public:
    TwistMap(std::size_t i, std::size_t k, std::vector<double> c, double w, double angle)
        : axes_{i, k}, c_(std::move(c)), w_(w), angle_(angle) {}

    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        rotate(x, y, angle_);
    }
    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        rotate(y, x, -angle_);
    }

private:
    template <class T>
    void rotate(std::span<const T> x, std::span<T> y, double angle) const {
        using std::cos;
        using std::sin;
        std::copy(x.begin(), x.end(), y.begin());
        const T u = squared_radius(x, axes_, c_, w_);
        if (value_of(u) >= 1.0) return;
        const T phi = profile(u) * angle;
        const T cs = cos(phi), sn = sin(phi);
        const T di = x[axes_[0]] - c_[0], dk = x[axes_[1]] - c_[1];
        y[axes_[0]] = c_[0] + cs * di - sn * dk;
        y[axes_[1]] = c_[1] + sn * di + cs * dk;
    }

    std::vector<std::size_t> axes_;
    std::vector<double> c_;
    double w_;
    double angle_;
};

struct Factor {
    std::shared_ptr<const DiffeoMap> map;
    bool inverted;
};

class BlockMap final : public MapBase<BlockMap> {
public:
    explicit BlockMap(std::vector<Factor> factors) : factors_(std::move(factors)) {}

    // factor_1 o ... o factor_m: the last factor is applied first.
    template <class T>
    void apply(std::span<const T> x, std::span<T> y) const {
        std::vector<T> cur(x.begin(), x.end()), next(cur);
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
            step(*it, cur, next, false);
            std::swap(cur, next);
        }
        std::copy(cur.begin(), cur.end(), y.begin());
    }
    template <class T>
    void apply_inverse(std::span<const T> y, std::span<T> x) const {
        std::vector<T> cur(y.begin(), y.end()), next(cur);
        for (const auto& f : factors_) {
            step(f, cur, next, true);
            std::swap(cur, next);
        }
        std::copy(cur.begin(), cur.end(), x.begin());
    }

private:
    template <class T>
    static void step(const Factor& f, const std::vector<T>& in, std::vector<T>& out, bool inverse) {
        if (f.inverted != inverse) f.map->inverse(std::span<const T>(in), std::span<T>(out));
        else f.map->forward(std::span<const T>(in), std::span<T>(out));
    }

    std::vector<Factor> factors_;
};

DiffeoKind classify(const std::vector<bool>& moved, const std::vector<bool>& read) {
    const std::size_t n = moved.size();
    if (std::none_of(moved.begin(), moved.end(), [](bool b) { return b; })) return DiffeoKind::identity;
    return moved[n - 1] || read[n - 1] ? DiffeoKind::general : DiffeoKind::structured;
}

SupportBox unbounded_box(std::size_t n) {
    return {std::vector<double>(n, -kInf), std::vector<double>(n, kInf), std::vector<bool>(n, false)};
}

void check_axes(std::size_t n, const std::vector<std::size_t>& axes, const char* what) {
    if (axes.empty()) throw UsageError(std::string(what) + ": no axes given");
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (axes[i] >= n) throw UsageError(std::string(what) + ": axis out of range");
        for (std::size_t k = 0; k < i; ++k)
            if (axes[k] == axes[i]) throw UsageError(std::string(what) + ": repeated axis");
    }
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

std::string format_list(std::span<const double> v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

double determinant(std::vector<double> m, std::size_t n) {
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
        if (m[piv * n + c] == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[piv * n + k]);
            det = -det;
        }
        det *= m[c * n + c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r * n + c] / m[c * n + c];
            for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
        }
    }
    return det;
}

}  // namespace

Diffeomorphism Diffeomorphism::identity(std::size_t n) {
    if (n == 0) throw UsageError("identity: dimension must be positive");
    Diffeomorphism d;
    d.map_ = std::make_shared<IdentityMap>();
    d.n_ = n;
    d.kind_ = DiffeoKind::identity;
    d.description_ = "identity";
    d.support_ = unbounded_box(n);
    d.moved_.assign(n, false);
    d.read_.assign(n, false);
    return d;
}

Diffeomorphism Diffeomorphism::translation(std::vector<double> shift) {
    const std::size_t n = shift.size();
    if (n == 0) throw UsageError("translation: empty shift");
    for (double s : shift) check_finite(s, "translation shift");
    Diffeomorphism d = identity(n);
    d.description_ = "translation:shift=" + format_list(shift);
    for (std::size_t l = 0; l < n; ++l) d.moved_[l] = shift[l] != 0.0;
    if (std::any_of(d.moved_.begin(), d.moved_.end(), [](bool b) { return b; })) d.kind_ = DiffeoKind::translation;
    d.map_ = std::make_shared<TranslationMap>(std::move(shift));
    return d;
}

Diffeomorphism Diffeomorphism::distortion(std::size_t n, std::vector<std::size_t> axes, std::vector<double> center,
                                          double width, double eps, std::vector<double> direction) {
    check_axes(n, axes, "distortion");
    if (center.size() != axes.size() || direction.size() != axes.size())
        throw UsageError("distortion: center and direction need one entry per axis");
    if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("distortion: width must be positive");
    check_finite(eps, "distortion eps");
    double vnorm = 0.0;
    for (double v : direction) {
        check_finite(v, "distortion direction");
        vnorm += v * v;
    }
    vnorm = std::sqrt(vnorm);
    const double slope = std::abs(eps) * vnorm * radial_slope_max() / width;
    if (slope > 0.5 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "distortion: |eps| max |grad B . v| = " << slope << " exceeds 1/2";
        throw DomainError(os.str());
    }
    Diffeomorphism d = identity(n);
    std::ostringstream os;
    os << "distortion:eps=" << eps << ",width=" << width << ",center=" << format_list(center);
    d.description_ = os.str();
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::size_t l = axes[i];
        d.read_[l] = true;
        d.moved_[l] = direction[i] != 0.0 && eps != 0.0;
        d.support_.bounded[l] = true;
        d.support_.lo[l] = center[i] - width;
        d.support_.hi[l] = center[i] + width;
    }
    if (eps == 0.0) std::fill(d.read_.begin(), d.read_.end(), false);
    d.kind_ = classify(d.moved_, d.read_);
    d.map_ = std::make_shared<DistortionMap>(std::move(axes), std::move(center), width, eps, std::move(direction));
    return d;
}

Diffeomorphism Diffeomorphism::shear(std::size_t n, std::size_t target, std::vector<std::size_t> sources,
                                     std::vector<double> center, double width, double eps) {
    check_axes(n, sources, "shear");
    if (target >= n) throw UsageError("shear: target axis out of range");
    if (std::find(sources.begin(), sources.end(), target) != sources.end())
        throw UsageError("shear: the target axis cannot be a source axis");
    if (center.size() != sources.size()) throw UsageError("shear: center needs one entry per source axis");
    if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("shear: width must be positive");
    check_finite(eps, "shear eps");
    Diffeomorphism d = identity(n);
    std::ostringstream os;
    os << "shear:eps=" << eps << ",width=" << width << ",center=" << format_list(center);
    d.description_ = os.str();
    if (eps != 0.0) {
        d.moved_[target] = true;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            const std::size_t l = sources[i];
            d.read_[l] = true;
            d.support_.bounded[l] = true;
            d.support_.lo[l] = center[i] - width;
            d.support_.hi[l] = center[i] + width;
        }
    }
    d.kind_ = classify(d.moved_, d.read_);
    d.map_ = std::make_shared<ShearMap>(target, std::move(sources), std::move(center), width, eps);
    return d;
}

Diffeomorphism Diffeomorphism::twist(std::size_t n, std::size_t i, std::size_t k, std::vector<double> center,
                                     double width, double angle) {
    check_axes(n, {i, k}, "twist");
    if (center.size() != 2) throw UsageError("twist: center needs two entries");
    if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("twist: width must be positive");
    check_finite(angle, "twist angle");
    Diffeomorphism d = identity(n);
    std::ostringstream os;
    os << "twist:angle=" << angle << ",width=" << width << ",center=" << format_list(center);
    d.description_ = os.str();
    if (angle != 0.0) {
        const std::size_t axes[2] = {i, k};
        for (int m = 0; m < 2; ++m) {
            const std::size_t l = axes[m];
            d.moved_[l] = d.read_[l] = true;
            d.support_.bounded[l] = true;
            d.support_.lo[l] = center[m] - width;
            d.support_.hi[l] = center[m] + width;
        }
    }
    d.kind_ = classify(d.moved_, d.read_);
    d.map_ = std::make_shared<TwistMap>(i, k, std::move(center), width, angle);
    return d;
}

Diffeomorphism Diffeomorphism::block(std::vector<std::vector<std::size_t>> blocks, std::vector<Diffeomorphism> factors) {
    if (blocks.size() < 2) throw UsageError("block: at least two blocks are required");
    if (blocks.size() != factors.size()) throw UsageError("block: one factor per block is required");
    std::size_t next = 0;
    for (const auto& b : blocks) {
        if (b.empty()) throw UsageError("block: empty block");
        for (std::size_t l : b)
            if (l != next++) throw UsageError("block: blocks must be consecutive runs of axes covering 0..n-1");
    }
    const std::size_t n = next;
    Diffeomorphism d = identity(n);
    std::vector<Factor> parts;
    std::ostringstream os;
    os << "block";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Diffeomorphism& f = factors[i];
        if (f.dim() != n) throw UsageError("block: factor dimension differs from the block total");
        if (f.kind() == DiffeoKind::block) throw UsageError("block: nested block maps are not supported");
        for (std::size_t l = 0; l < n; ++l) {
            const bool inside = l >= blocks[i].front() && l <= blocks[i].back();
            if (!inside && (f.moved_[l] || f.read_[l]))
                throw UsageError("block: factor " + std::to_string(i + 1) + " acts outside its block");
            if (!inside) continue;
            d.moved_[l] = f.moved_[l];
            d.read_[l] = f.read_[l];
            d.support_.bounded[l] = f.support_.bounded[l];
            d.support_.lo[l] = f.support_.lo[l];
            d.support_.hi[l] = f.support_.hi[l];
        }
        parts.push_back({f.map_, f.inverted_});
        os << (i ? ";" : ":") << f.description();
    }
    d.description_ = os.str();
    d.kind_ = DiffeoKind::block;
    d.blocks_ = std::move(blocks);
    d.factors_ = std::move(factors);
    d.map_ = std::make_shared<BlockMap>(std::move(parts));
    return d;
}

AnisoPoint Diffeomorphism::operator()(std::span<const double> x) const {
    if (x.size() != n_) throw UsageError("point dimension differs from the map dimension");
    AnisoPoint y(n_);
    if (inverted_) map_->inverse(x, y);
    else map_->forward(x, y);
    return y;
}

AnisoPoint Diffeomorphism::inverse(std::span<const double> y) const {
    if (y.size() != n_) throw UsageError("point dimension differs from the map dimension");
    AnisoPoint x(n_);
    if (inverted_) map_->forward(y, x);
    else map_->inverse(y, x);
    return x;
}

std::vector<Jet> Diffeomorphism::jet(std::span<const double> x, int order) const {
    if (x.size() != n_) throw UsageError("point dimension differs from the map dimension");
    auto space = JetSpace::get(n_, order);
    std::vector<Jet> in, out;
    for (std::size_t l = 0; l < n_; ++l) in.push_back(Jet::variable(space, l, x[l]));
    out = in;
    if (inverted_) map_->inverse(std::span<const Jet>(in), std::span<Jet>(out));
    else map_->forward(std::span<const Jet>(in), std::span<Jet>(out));
    return out;
}

bool Diffeomorphism::moves(std::span<const double> x) const {
    switch (kind_) {
        case DiffeoKind::identity: return false;
        case DiffeoKind::translation: return true;
        case DiffeoKind::block:
            return std::any_of(factors_.begin(), factors_.end(), [&](const Diffeomorphism& f) { return f.moves(x); });
        default: return support_.contains(x);
    }
}

Diffeomorphism Diffeomorphism::inverted() const {
    Diffeomorphism d = *this;
    d.inverted_ = !inverted_;
    d.description_ = "inverse(" + description_ + ")";
    for (auto& f : d.factors_) f = f.inverted();
    return d;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("sigma: key '" + key + "' has a malformed value '" + text + "'");
}

}  // namespace

Diffeomorphism parse_diffeomorphism(const std::string& text, std::span<const double> L) {
    const std::size_t n = L.size();
    if (n == 0) throw UsageError("sigma: empty box");
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::map<std::string, std::vector<double>> kv;
    if (colon != std::string::npos) {
        std::string key;
        for (const auto& tok : split(text.substr(colon + 1), ',')) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                if (key.empty()) throw UsageError("sigma: expected key=value, got '" + tok + "'");
                kv[key].push_back(parse_number(key, tok));
            } else {
                key = tok.substr(0, eq);
                kv[key].push_back(parse_number(key, tok.substr(eq + 1)));
            }
        }
    }
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : kv)
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                throw UsageError("sigma: unknown key '" + k + "' for " + name);
    };
    auto scalar = [&](const char* key, double fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second.size() != 1) throw UsageError(std::string("sigma: key '") + key + "' takes one value");
        return it->second[0];
    };
    auto axis_list = [&](const char* key, std::vector<std::size_t> fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        std::vector<std::size_t> axes;
        for (double v : it->second) {
            if (v < 1 || v > static_cast<double>(n) || v != std::floor(v))
                throw UsageError(std::string("sigma: key '") + key + "' needs 1-based axis numbers");
            axes.push_back(static_cast<std::size_t>(v) - 1);
        }
        return axes;
    };
    auto center_for = [&](const std::vector<std::size_t>& axes) {
        auto it = kv.find("center");
        std::vector<double> c;
        if (it == kv.end()) {
            for (std::size_t l : axes) c.push_back(0.5 * L[l]);
            return c;
        }
        if (it->second.size() != axes.size())
            throw UsageError("sigma: key 'center' needs " + std::to_string(axes.size()) + " values");
        return it->second;
    };
    const double w_default = 0.25 * *std::min_element(L.begin(), L.end());
    std::vector<std::size_t> head;  // x' axes, or axis 1 alone in one dimension
    for (std::size_t l = 0; l + 1 < std::max<std::size_t>(n, 2); ++l) head.push_back(l);

    if (name == "identity") {
        allow({});
        return Diffeomorphism::identity(n);
    }
    if (name == "translation") {
        allow({"shift"});
        auto it = kv.find("shift");
        if (it == kv.end() || it->second.size() != n)
            throw UsageError("sigma: key 'shift' needs " + std::to_string(n) + " values");
        return Diffeomorphism::translation(it->second);
    }
    if (name == "distortion") {
        allow({"eps", "width", "center", "axes", "dir"});
        const auto axes = axis_list("axes", head);
        const double w = scalar("width", w_default);
        std::vector<double> v(axes.size(), 0.0);
        v[0] = 1.0;
        if (auto it = kv.find("dir"); it != kv.end()) {
            if (it->second.size() != axes.size())
                throw UsageError("sigma: key 'dir' needs " + std::to_string(axes.size()) + " values");
            v = it->second;
        }
        double vn = 0.0;
        for (double x : v) vn += x * x;
        const double eps = scalar("eps", 0.25 * w / (std::sqrt(vn) * radial_slope_max()));
        return Diffeomorphism::distortion(n, axes, center_for(axes), w, eps, v);
    }
    if (name == "shear") {
        allow({"eps", "width", "center", "target", "sources"});
        const auto target = axis_list("target", {0});
        if (target.size() != 1) throw UsageError("sigma: key 'target' takes one axis");
        std::vector<std::size_t> sources;
        for (std::size_t l : head)
            if (l != target[0]) sources.push_back(l);
        if (sources.empty()) sources.push_back(n - 1);
        sources = axis_list("sources", sources);
        return Diffeomorphism::shear(n, target[0], sources, center_for(sources), scalar("width", w_default),
                                     scalar("eps", 0.1));
    }
    if (name == "twist") {
        allow({"angle", "width", "center", "axes"});
        if (n < 2) throw UsageError("sigma: twist needs at least two dimensions");
        const auto axes = axis_list("axes", {0, 1});
        if (axes.size() != 2) throw UsageError("sigma: key 'axes' takes two axes for twist");
        return Diffeomorphism::twist(n, axes[0], axes[1], center_for(axes), scalar("width", w_default),
                                     scalar("angle", 0.5));
    }
    throw UsageError("sigma: unknown map '" + name + "'");
}

DiffeoConstants diffeo_constants(const Diffeomorphism& sigma) {
    const std::size_t n = sigma.dim();
    constexpr int K = 4;
    constexpr int M = 32;
    auto space = JetSpace::get(n, K);
    DiffeoConstants out;
    for (std::size_t i = 1; i < space->size(); ++i) out.alphas.push_back(space->multi_index(i));
    const std::size_t A = out.alphas.size();
    const SupportBox& box = sigma.support();

    std::size_t total = 1;
    for (std::size_t l = 0; l < n; ++l) total *= M;
    const std::size_t rows = total / M;

    struct Partial {
        std::vector<double> sup;
        double det_min = kInf, det_max = 0.0;
    };
    std::vector<Partial> parts(rows);
    parallel_for(rows, [&](std::size_t r) {
        Partial& part = parts[r];
        part.sup.assign(n * A, 0.0);
        std::vector<double> x(n), jac(n * n);
        for (int i0 = 0; i0 < M; ++i0) {
            std::size_t rest = r;
            for (std::size_t l = 0; l < n; ++l) {
                int idx = i0;
                if (l > 0) {
                    idx = static_cast<int>(rest % M);
                    rest /= M;
                }
                const double lo = box.bounded[l] ? box.lo[l] : -1.0;
                const double hi = box.bounded[l] ? box.hi[l] : 1.0;
                x[l] = lo + (idx + 0.5) * (hi - lo) / M;
            }
            const auto ys = sigma.jet(x, K);
            for (std::size_t j = 0; j < n; ++j) {
                const auto c = ys[j].coefficients();
                for (std::size_t a = 0; a < A; ++a) {
                    double fact = 1.0;
                    for (int e : out.alphas[a])
                        for (int k = 2; k <= e; ++k) fact *= k;
                    part.sup[j * A + a] = std::max(part.sup[j * A + a], std::abs(c[a + 1] * fact));
                }
                for (std::size_t l = 0; l < n; ++l) jac[j * n + l] = c[1 + l];
            }
            const double det = std::abs(determinant(jac, n));
            part.det_min = std::min(part.det_min, det);
            part.det_max = std::max(part.det_max, det);
        }
    });
    out.component_sup.assign(n, std::vector<double>(A, 0.0));
    out.C_alpha.assign(A, 0.0);
    double det_min = 1.0, det_max = 1.0;
    for (const auto& part : parts) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t a = 0; a < A; ++a) {
                out.component_sup[j][a] = std::max(out.component_sup[j][a], part.sup[j * A + a]);
                out.C_alpha[a] = std::max(out.C_alpha[a], part.sup[j * A + a]);
            }
        det_min = std::min(det_min, part.det_min);
        det_max = std::max(det_max, part.det_max);
    }
    out.c_sigma = det_min;
    out.c_tau = 1.0 / det_max;
    return out;
}

namespace {

void check_support_margin(const SupportBox& box, const GridSpec& spec) {
    for (std::size_t l = 0; l < spec.dim(); ++l) {
        if (!box.bounded[l]) continue;
        const double margin = 2.0 * spec.spacing(l);
        if (box.lo[l] < margin || box.hi[l] > spec.length(l) - margin) {
            std::ostringstream os;
            os << "perturbation support [" << box.lo[l] << ", " << box.hi[l] << "] on axis " << l + 1
               << " is not inside [" << margin << ", " << spec.length(l) - margin << "]";
            throw PreconditionError("sigma support plus margin inside the box", os.str());
        }
    }
}

void check_compact_support(const GridFunction& f, int id) {
    const GridSpec& spec = f.spec();
    if (!(f.max_abs() > 0.0)) return;
    const Box supp = numerical_support(f);
    for (std::size_t l = 0; l < spec.dim(); ++l) {
        const double margin = 2.0 * spec.spacing(l);
        if (supp.lo[l] < margin || supp.hi[l] > spec.length(l) - margin) {
            std::ostringstream os;
            os << "family member " << id << " reaches within " << margin << " of the box faces on axis " << l + 1;
            throw PreconditionError("f compactly supported inside the box", os.str());
        }
    }
}

}  // namespace

GridFunction compose(const SpectralFunction& f, const Diffeomorphism& sigma) {
    const GridSpec& spec = f.spec();
    const std::size_t n = spec.dim();
    if (sigma.dim() != n) throw UsageError("compose: map dimension differs from the grid dimension");
    check_support_margin(sigma.support(), spec);
    GridFunction out = fft_inverse(f);
    const auto& moved = sigma.moved();
    if (std::none_of(moved.begin(), moved.end(), [](bool b) { return b; })) return out;
    if (sigma.kind() == DiffeoKind::translation) {
        // The interpolant at x + shift: a phase factor on every coefficient.
        std::vector<double> zero(n, 0.0);
        const AnisoPoint shift = sigma(zero);
        SpectralFunction shifted = f;
        shifted.multiply([&](std::span<const double> xi) {
            double phase = 0.0;
            for (std::size_t l = 0; l < n; ++l) phase += xi[l] * shift[l];
            return std::polar(1.0, phase);
        });
        return fft_inverse(shifted);
    }

    const PartialInterpolant interp(f, moved);
    const std::size_t row = static_cast<std::size_t>(spec.points(0));
    const std::size_t rows = spec.size() / row;
    parallel_for(rows, [&](std::size_t r) {
        std::vector<double> x(n);
        std::vector<int> index(n);
        for (std::size_t i = r * row; i < (r + 1) * row; ++i) {
            spec.point_at(i, x);
            if (!sigma.moves(x)) continue;
            spec.unravel(i, index);
            const AnisoPoint y = sigma(x);
            out[i] = interp(y, index);
        }
    });
    return out;
}

bool invariance_hypotheses(const Diffeomorphism& sigma, const SpaceParams& params) {
    const std::size_t n = sigma.dim();
    const auto& a = params.a;
    const auto& pq = params.pq;
    if (a.size() != n || pq.size() != n) throw UsageError("parameter dimension differs from the map dimension");
    auto constant_on = [&](std::size_t first, std::size_t last) {
        for (std::size_t l = first + 1; l <= last; ++l)
            if (a[l] != a[first] || pq.p(l) != pq.p(first)) return false;
        return true;
    };
    if (sigma.kind() == DiffeoKind::block) {
        for (const auto& b : sigma.blocks())
            if (!constant_on(b.front(), b.back())) return false;
        return true;
    }
    if (sigma.kind() == DiffeoKind::identity) return true;
    if (sigma.moved()[n - 1] || sigma.read()[n - 1]) return false;
    return n < 2 || constant_on(0, n - 2);
}

namespace {

struct NormPair {
    double lhs, rhs, tail;
};

// f_norm of sigma-composed members against the originals; rows in (param, member) order.
std::vector<NormPair> ratio_rows(std::span<const SpectralFunction> members, const Diffeomorphism& sigma,
                                 std::span<const SpaceParams> points, std::span<const double> s_shift) {
    const std::size_t F = members.size();
    std::vector<SpectralFunction> composed;
    composed.reserve(F);
    for (const auto& u : members) composed.push_back(fft_forward(compose(u, sigma)));
    std::vector<DecompositionSystem> systems;
    for (const auto& p : points) systems.push_back(build_partition(p.a, members[0].spec()));
    std::vector<NormPair> rows(F * points.size());
    parallel_for(rows.size(), [&](std::size_t k) {
        const std::size_t pi = k / F, fi = k % F;
        SpaceParams params = points[pi];
        params.s += s_shift.empty() ? 0.0 : s_shift[pi];
        const double tail = tail_fraction(systems[pi], composed[fi]);
        const double lhs = f_norm(composed[fi], params, systems[pi], TailPolicy::report);
        const double rhs = f_norm(members[fi], params, systems[pi], TailPolicy::enforce);
        rows[k] = {lhs, rhs, tail};
    });
    return rows;
}

}  // namespace

InvarianceTable invariance_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                      std::span<const SpaceParams> points) {
    if (family.empty() || points.empty()) return {};
    std::vector<SpectralFunction> members;
    for (std::size_t i = 0; i < family.size(); ++i) {
        check_compact_support(family[i], static_cast<int>(i));
        members.push_back(fft_forward(family[i]));
    }
    const auto pairs = ratio_rows(members, sigma, points, {});
    InvarianceTable table;
    table.bands.resize(points.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::size_t pi = k / family.size(), fi = k % family.size();
        InvarianceRow row;
        row.f_id = static_cast<int>(fi);
        row.param = pi;
        row.hypothesis_ok = invariance_hypotheses(sigma, points[pi]);
        row.lhs = pairs[k].lhs;
        row.rhs = pairs[k].rhs;
        row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : std::nan("");
        row.tail = pairs[k].tail;
        table.bands[pi].add(row.lhs, row.rhs);
        table.rows.push_back(row);
    }
    return table;
}

BlockInvarianceReport block_invariance_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                                  const SpaceParams& params) {
    if (sigma.kind() != DiffeoKind::block) throw UsageError("block experiment: sigma is not a block map");
    if (!invariance_hypotheses(sigma, params))
        throw PreconditionError("p and a constant within each block",
                                "the exponents or anisotropy weights vary inside a declared block");
    std::vector<SpectralFunction> members;
    for (std::size_t i = 0; i < family.size(); ++i) {
        check_compact_support(family[i], static_cast<int>(i));
        members.push_back(fft_forward(family[i]));
    }
    BlockInvarianceReport rep;
    const SpaceParams pts[1] = {params};
    auto band = [&](const Diffeomorphism& d) {
        RatioStats st;
        for (const auto& r : ratio_rows(members, d, pts, {})) st.add(r.lhs, r.rhs);
        return st;
    };
    rep.bound = 1.0;
    for (const auto& f : sigma.factors()) {
        rep.factors.push_back(band(f));
        rep.bound *= rep.factors.back().max;
    }
    rep.composite = band(sigma);
    rep.within_bound = rep.composite.max <= 1.1 * rep.bound;
    return rep;
}

LiftRouteReport lift_route_experiment(std::span<const GridFunction> family, const Diffeomorphism& sigma,
                                      const SpaceParams& params, double r) {
    if (!(r > 0.0)) throw UsageError("lift route: r must be positive");
    LiftRouteReport rep;
    rep.r = r;
    std::vector<SpectralFunction> members, lifted;
    const MultiplierSymbol inv = lambda_symbol(params.a, r).reciprocal();
    for (std::size_t i = 0; i < family.size(); ++i) {
        check_compact_support(family[i], static_cast<int>(i));
        members.push_back(fft_forward(family[i]));
        lifted.push_back(multiply_spectrum(inv, members.back()));
    }
    const SpaceParams pts[1] = {params};
    for (const auto& row : ratio_rows(members, sigma, pts, {})) rep.direct.add(row.lhs, row.rhs);
    const double shift[1] = {r};
    for (const auto& row : ratio_rows(lifted, sigma, pts, shift)) rep.lifted.add(row.lhs, row.rhs);
    rep.min_deviation = std::abs(rep.lifted.min / rep.direct.min - 1.0);
    rep.max_deviation = std::abs(rep.lifted.max / rep.direct.max - 1.0);
    rep.consistent = rep.min_deviation <= 0.2 && rep.max_deviation <= 0.2;
    return rep;
}

}  // namespace anisoft
