#include "anisoft/grid.hpp"

#include "anisoft/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

namespace anisoft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The FFTW planner is not re-entrant; every plan creation and destruction goes through here.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(std::vector<double> box_lengths, std::vector<int> points)
    : lengths_(std::move(box_lengths)), points_(std::move(points)) {
    if (lengths_.empty()) throw ConfigError("grid must have at least one axis");
    if (lengths_.size() != points_.size())
        throw ConfigError("grid has " + std::to_string(lengths_.size()) + " box lengths but " +
                          std::to_string(points_.size()) + " point counts");
    strides_.resize(lengths_.size());
    total_ = 1;
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
        if (!(lengths_[j] > 0.0) || !std::isfinite(lengths_[j]))
            throw ConfigError("box length on axis " + std::to_string(j + 1) + " must be positive");
        if (points_[j] < 8 || points_[j] % 2 != 0)
            throw ConfigError("points on axis " + std::to_string(j + 1) +
                              " must be even and >= 8, got " + std::to_string(points_[j]));
        strides_[j] = total_;
        total_ *= static_cast<std::size_t>(points_[j]);
    }
}

GridSpec GridSpec::cube(std::size_t n, double length, int points) {
    return GridSpec(std::vector<double>(n, length), std::vector<int>(n, points));
}

double GridSpec::cell_volume() const noexcept {
    double v = 1.0;
    for (std::size_t j = 0; j < dim(); ++j) v *= spacing(j);
    return v;
}

double GridSpec::box_volume() const noexcept {
    double v = 1.0;
    for (double l : lengths_) v *= l;
    return v;
}

double GridSpec::frequency(std::size_t axis, int i) const noexcept {
    return kTwoPi * wavenumber(axis, i) / lengths_[axis];
}

void GridSpec::unravel(std::size_t flat, std::span<int> index) const noexcept {
    for (std::size_t j = 0; j < dim(); ++j) {
        index[j] = static_cast<int>(flat % points_[j]);
        flat /= points_[j];
    }
}

std::size_t GridSpec::ravel(std::span<const int> index) const noexcept {
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dim(); ++j) flat += strides_[j] * static_cast<std::size_t>(index[j]);
    return flat;
}

void GridSpec::frequency_at(std::size_t flat, std::span<double> xi) const noexcept {
    for (std::size_t j = 0; j < dim(); ++j) {
        const int i = static_cast<int>(flat % points_[j]);
        flat /= points_[j];
        xi[j] = frequency(j, i);
    }
}

void GridSpec::point_at(std::size_t flat, std::span<double> x) const noexcept {
    for (std::size_t j = 0; j < dim(); ++j) {
        const int i = static_cast<int>(flat % points_[j]);
        flat /= points_[j];
        x[j] = coordinate(j, i);
    }
}

GridSpec GridSpec::refined(int factor) const {
    std::vector<int> p(points_);
    for (auto& v : p) v *= factor;
    return GridSpec(lengths_, std::move(p));
}

// ------------------------------------------------------------ GridFunction

GridFunction::GridFunction(GridSpec spec) : spec_(std::move(spec)), samples_(spec_.size()) {}

GridFunction::GridFunction(GridSpec spec, std::vector<cplx> samples)
    : spec_(std::move(spec)), samples_(std::move(samples)) {
    if (samples_.size() != spec_.size())
        throw UsageError("sample count " + std::to_string(samples_.size()) +
                         " does not match grid size " + std::to_string(spec_.size()));
    for (const auto& v : samples_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("grid function has a non-finite sample");
}

GridFunction GridFunction::from_function(const GridSpec& spec,
                                         const std::function<cplx(std::span<const double>)>& f) {
    std::vector<cplx> s(spec.size());
    std::vector<double> x(spec.dim());
    for (std::size_t i = 0; i < s.size(); ++i) {
        spec.point_at(i, x);
        s[i] = f(x);
    }
    return GridFunction(spec, std::move(s));
}

double GridFunction::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& v : samples_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> GridFunction::moduli() const {
    std::vector<double> m(samples_.size());
    std::transform(samples_.begin(), samples_.end(), m.begin(), [](cplx v) { return std::abs(v); });
    return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    if (!(spec_ == other.spec_)) throw UsageError("adding grid functions on different grids");
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(cplx c) {
    for (auto& v : samples_) v *= c;
    return *this;
}

// -------------------------------------------------------- SpectralFunction

SpectralFunction::SpectralFunction(GridSpec spec) : spec_(std::move(spec)), coeffs_(spec_.size()) {}

SpectralFunction::SpectralFunction(GridSpec spec, std::vector<cplx> coeffs)
    : spec_(std::move(spec)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != spec_.size())
        throw UsageError("coefficient count does not match grid size");
}

std::size_t SpectralFunction::offset_of(std::span<const int> k) const {
    if (k.size() != spec_.dim()) throw UsageError("wavenumber has wrong dimension");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < spec_.dim(); ++j) {
        const int n = spec_.points(j);
        if (k[j] < -n / 2 || k[j] >= n / 2)
            throw UsageError("wavenumber " + std::to_string(k[j]) + " outside lattice band on axis " +
                             std::to_string(j + 1));
        const int i = k[j] >= 0 ? k[j] : k[j] + n;
        flat += spec_.stride(j) * static_cast<std::size_t>(i);
    }
    return flat;
}

cplx SpectralFunction::at_wavenumber(std::span<const int> k) const { return coeffs_[offset_of(k)]; }

SpectralFunction& SpectralFunction::multiply(
    const std::function<cplx(std::span<const double>)>& symbol) {
    std::vector<double> xi(spec_.dim());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        spec_.frequency_at(i, xi);
        coeffs_[i] *= symbol(xi);
    }
    return *this;
}

// --------------------------------------------------------------------- FFT

namespace {

// FFTW plans are created once per (shape, direction) under a mutex and then
// executed through the thread-safe new-array interface.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const GridSpec& spec, int sign) {
        std::vector<int> dims(spec.point_counts().rbegin(), spec.point_counts().rend());
        Key key{dims, sign};
        std::lock_guard lock(planner_mutex());
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cplx> in(spec.size()), out(spec.size());
        fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                                    reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }

private:
    struct Key {
        std::vector<int> dims;
        int sign;
        bool operator<(const Key& o) const { return std::tie(dims, sign) < std::tie(o.dims, o.sign); }
    };
    std::map<Key, fftw_plan> plans_;
};

void execute(const GridSpec& spec, int sign, std::span<const cplx> in, std::span<cplx> out) {
    fftw_plan p = PlanCache::instance().get(spec, sign);
    // FFTW does not modify the input of an out-of-place complex transform.
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

SpectralFunction fft_forward(const GridFunction& u) {
    const auto& spec = u.spec();
    std::vector<cplx> out(spec.size());
    execute(spec, FFTW_FORWARD, u.samples(), out);
    const double scale = spec.cell_volume();
    for (auto& v : out) v *= scale;
    return SpectralFunction(spec, std::move(out));
}

GridFunction fft_inverse(const SpectralFunction& u) {
    const auto& spec = u.spec();
    std::vector<cplx> out(spec.size());
    execute(spec, FFTW_BACKWARD, u.coeffs(), out);
    const double scale = 1.0 / spec.box_volume();
    for (auto& v : out) v *= scale;
    return GridFunction(spec, std::move(out));
}

// ---------------------------------------------------------------- Resample

PartialInterpolant::PartialInterpolant(const SpectralFunction& u, std::vector<bool> active)
    : spec_(u.spec()), active_(std::move(active)) {
    const std::size_t n = spec_.dim();
    if (active_.size() != n) throw UsageError("active-axis mask has wrong dimension");
    for (std::size_t j = 0; j < n; ++j) (active_[j] ? active_axes_ : inactive_axes_).push_back(j);

    // 1-D inverse transforms along every inactive axis.
    std::vector<cplx> data(u.coeffs().begin(), u.coeffs().end());
    for (std::size_t axis : inactive_axes_) {
        const int len = spec_.points(axis);
        const std::size_t stride = spec_.stride(axis);
        const double inv_len = 1.0 / spec_.length(axis);
        std::vector<cplx> line(len), out(len);
        int dims[1] = {len};
        fftw_plan p;
        {
            std::lock_guard lock(planner_mutex());
            p = fftw_plan_dft(1, dims, reinterpret_cast<fftw_complex*>(line.data()),
                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                              FFTW_ESTIMATE);
        }
        for (std::size_t base = 0; base < data.size(); ++base) {
            if ((base / stride) % len != 0) continue;  // only line starts
            for (int i = 0; i < len; ++i) line[i] = data[base + i * stride];
            fftw_execute(p);
            for (int i = 0; i < len; ++i) data[base + i * stride] = out[i] * inv_len;
        }
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(p);
        }
    }

    for (std::size_t axis : active_axes_) block_ *= spec_.points(axis);
    blocks_.resize(spec_.size());
    std::vector<int> idx(n);
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        spec_.unravel(flat, idx);
        std::size_t a = 0, sa = 1;
        for (std::size_t axis : active_axes_) {
            a += sa * idx[axis];
            sa *= spec_.points(axis);
        }
        std::size_t b = 0, sb = 1;
        for (std::size_t axis : inactive_axes_) {
            b += sb * idx[axis];
            sb *= spec_.points(axis);
        }
        blocks_[b * block_ + a] = data[flat];
    }
}

cplx PartialInterpolant::operator()(std::span<const double> x, std::span<const int> lattice_index) const {
    std::size_t b = 0, sb = 1;
    for (std::size_t axis : inactive_axes_) {
        b += sb * static_cast<std::size_t>(lattice_index[axis]);
        sb *= spec_.points(axis);
    }
    const cplx* block = blocks_.data() + b * block_;
    if (active_axes_.empty()) return block[0];

    thread_local std::vector<cplx> work;
    thread_local std::vector<std::vector<cplx>> phases;
    work.resize(block_);
    phases.resize(active_axes_.size());
    for (std::size_t m = 0; m < active_axes_.size(); ++m) phases[m].resize(spec_.points(active_axes_[m]));

    double inv_active_volume = 1.0;
    for (std::size_t m = 0; m < active_axes_.size(); ++m) {
        const std::size_t axis = active_axes_[m];
        const int len = spec_.points(axis);
        const double xm = x[axis];
        inv_active_volume /= spec_.length(axis);
        // e^{i k theta} by repeated multiplication, re-anchored every 32 steps.
        const double theta = kTwoPi * xm / spec_.length(axis);
        const cplx step(std::cos(theta), std::sin(theta));
        cplx ph;
        for (int k = -(len - len / 2), t = 0; k < len / 2; ++k, ++t) {
            if (t % 32 == 0) ph = std::polar(1.0, k * theta);
            else ph *= step;
            phases[m][k >= 0 ? k : k + len] = ph;
        }
    }
    // Contract the fastest active axis first, then the next, in place.
    std::size_t len_total = block_;
    std::copy(block, block + block_, work.begin());
    for (std::size_t m = 0; m < active_axes_.size(); ++m) {
        const int len = static_cast<int>(phases[m].size());
        const std::size_t rest = len_total / len;
        for (std::size_t r = 0; r < rest; ++r) {
            cplx acc = 0.0;
            const cplx* row = work.data() + r * len;
            for (int i = 0; i < len; ++i) acc += row[i] * phases[m][i];
            work[r] = acc;
        }
        len_total = rest;
    }
    return work[0] * inv_active_volume;
}

std::vector<cplx> resample(const SpectralFunction& u, std::span<const AnisoPoint> points) {
    const auto& spec = u.spec();
    PartialInterpolant interp(u, std::vector<bool>(spec.dim(), true));
    std::vector<int> dummy(spec.dim(), 0);
    std::vector<cplx> out;
    out.reserve(points.size());
    std::vector<double> y(spec.dim());
    for (const auto& p : points) {
        if (p.size() != spec.dim()) throw UsageError("resample point has wrong dimension");
        for (std::size_t j = 0; j < spec.dim(); ++j) {
            const double L = spec.length(j);
            y[j] = p[j] - L * std::floor(p[j] / L);
        }
        out.push_back(interp(y, dummy));
    }
    return out;
}

// ------------------------------------------------------------------ Energy

double energy_fraction(const SpectralFunction& u,
                       const std::function<bool(std::span<const double>)>& mask) {
    const auto& spec = u.spec();
    std::vector<double> xi(spec.dim());
    double total = 0.0, part = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = std::norm(u[i]);
        total += e;
        spec.frequency_at(i, xi);
        if (mask(xi)) part += e;
    }
    return total > 0.0 ? part / total : 0.0;
}

double grid_energy(const GridFunction& u) {
    double s = 0.0;
    for (const auto& v : u.samples()) s += std::norm(v);
    return s * u.spec().cell_volume();
}

double spectral_energy(const SpectralFunction& u) {
    double s = 0.0;
    for (const auto& v : u.coeffs()) s += std::norm(v);
    return s / u.spec().box_volume();
}

// --------------------------------------------------------------------- I/O

namespace {

void put_le(std::ostream& os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    os.write(bytes, 8);
}

double get_le(std::istream& is) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("grid file truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

template <class T>
std::vector<T> split_list(const std::string& s) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v;
        if (!(is >> v)) throw ConfigError("malformed grid header entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

void write_grid(std::ostream& os, const GridFunction& u) {
    const auto& spec = u.spec();
    std::ostringstream header;
    header << spec.dim() << ';';
    for (std::size_t j = 0; j < spec.dim(); ++j) header << (j ? "," : "") << spec.points(j);
    header << ';' << std::setprecision(17);
    for (std::size_t j = 0; j < spec.dim(); ++j) header << (j ? "," : "") << spec.length(j);
    header << '\n';
    os << header.str();
    for (const auto& v : u.samples()) {
        put_le(os, v.real());
        put_le(os, v.imag());
    }
}

GridFunction read_grid(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("grid file is empty");
    const auto p1 = line.find(';');
    const auto p2 = line.find(';', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
        throw ConfigError("grid header must read 'n;points;box_lengths'");
    const auto n = split_list<std::size_t>(line.substr(0, p1));
    auto points = split_list<int>(line.substr(p1 + 1, p2 - p1 - 1));
    auto lengths = split_list<double>(line.substr(p2 + 1));
    if (n.size() != 1 || points.size() != n[0] || lengths.size() != n[0])
        throw ConfigError("grid header dimension mismatch");
    GridSpec spec(std::move(lengths), std::move(points));
    std::vector<cplx> s(spec.size());
    for (auto& v : s) {
        const double re = get_le(is);
        const double im = get_le(is);
        v = cplx(re, im);
    }
    return GridFunction(spec, std::move(s));
}

void write_grid_file(const std::filesystem::path& path, const GridFunction& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    write_grid(os, u);
}

GridFunction read_grid_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open grid file " + path.string());
    return read_grid(is);
}

void write_grid_csv(std::ostream& os, const GridFunction& u) {
    const auto& spec = u.spec();
    for (std::size_t j = 0; j < spec.dim(); ++j) os << "x" << j + 1 << ',';
    os << "re,im\n";
    os << std::setprecision(17);
    std::vector<double> x(spec.dim());
    for (std::size_t i = 0; i < u.size(); ++i) {
        spec.point_at(i, x);
        for (double v : x) os << v << ',';
        os << u[i].real() << ',' << u[i].imag() << '\n';
    }
}

}  // namespace anisoft
