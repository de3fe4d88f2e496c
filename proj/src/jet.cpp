#include "anisoft/jet.hpp"

#include "anisoft/errors.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace anisoft {

JetSpace::JetSpace(std::size_t n, int order) : n_(n), K_(order) {
    if (n == 0 || order < 0) throw UsageError("jet space needs n >= 1 and order >= 0");
    std::vector<int> alpha(n, 0);
    for (int total = 0; total <= order; ++total) {
        // Lexicographic (descending first entry) within one order.
        std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int left) {
            if (axis + 1 == n) {
                alpha[axis] = left;
                index_.push_back(alpha);
                return;
            }
            for (int v = left; v >= 0; --v) {
                alpha[axis] = v;
                rec(axis + 1, left - v);
            }
        };
        rec(0, total);
    }
    std::vector<int> sum(n);
    for (std::size_t i = 0; i < index_.size(); ++i)
        for (std::size_t j = 0; j < index_.size(); ++j) {
            int total = 0;
            for (std::size_t l = 0; l < n; ++l) {
                sum[l] = index_[i][l] + index_[j][l];
                total += sum[l];
            }
            if (total <= order) products_.push_back({i, j, find(sum)});
        }
}

std::shared_ptr<const JetSpace> JetSpace::get(std::size_t n, int order) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<const JetSpace>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, order}];
    if (!slot) slot = std::make_shared<const JetSpace>(n, order);
    return slot;
}

std::size_t JetSpace::find(std::span<const int> alpha) const {
    if (alpha.size() != n_) throw UsageError("multi-index has the wrong length");
    int total = 0;
    for (int a : alpha) {
        if (a < 0) throw UsageError("multi-index entries must be nonnegative");
        total += a;
    }
    if (total > K_) throw UsageError("multi-index order exceeds the jet order");
    // Offset of the first index of this order, then a linear scan within it.
    std::size_t i = 0;
    while (i < index_.size()) {
        int t = 0;
        for (int a : index_[i]) t += a;
        if (t == total) break;
        ++i;
    }
    for (; i < index_.size(); ++i)
        if (std::equal(alpha.begin(), alpha.end(), index_[i].begin())) return i;
    throw UsageError("multi-index not found");
}

Jet::Jet(std::shared_ptr<const JetSpace> space, double value) : space_(std::move(space)), c_(space_->size(), 0.0) {
    c_[0] = value;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, std::size_t axis, double value) {
    Jet j(space, value);
    if (axis >= space->vars()) throw UsageError("variable index out of range");
    if (space->order() >= 1) j.c_[1 + axis] = 1.0;
    return j;
}

double Jet::derivative(std::span<const int> alpha) const {
    double fact = 1.0;
    for (int a : alpha)
        for (int k = 2; k <= a; ++k) fact *= k;
    return c_[space_->find(alpha)] * fact;
}

Jet& Jet::operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator+=(double v) {
    c_[0] += v;
    return *this;
}

Jet& Jet::operator*=(double v) {
    for (double& x : c_) x *= v;
    return *this;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& x : r.c_) x = -x;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.space_, 0.0);
    for (const auto& p : a.space_->products()) r.c_[p.out] += a.c_[p.left] * b.c_[p.right];
    return r;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet Jet::compose(std::span<const double> d) const {
    // f(a + h) = sum_k f^(k)(a) / k! h^k with h nilpotent of order K + 1.
    const int K = space_->order();
    Jet h = *this;
    h.c_[0] = 0.0;
    Jet result(space_, d[0]);
    Jet power(space_, 1.0);
    double fact = 1.0;
    for (int k = 1; k <= K; ++k) {
        power = power * h;
        fact *= k;
        Jet term = power;
        term *= d[k] / fact;
        result += term;
    }
    return result;
}

Jet operator/(double v, const Jet& a) {
    const int K = a.space_->order();
    std::vector<double> d(K + 1);
    const double x = a.value();
    double f = 1.0;
    for (int k = 0; k <= K; ++k) {
        d[k] = (k % 2 == 0 ? 1.0 : -1.0) * f / std::pow(x, k + 1) * v;
        f *= k + 1;
    }
    return a.compose(d);
}

Jet operator/(const Jet& a, const Jet& b) { return a * (1.0 / b); }

Jet exp(const Jet& a) {
    std::vector<double> d(a.space_->order() + 1, std::exp(a.value()));
    return a.compose(d);
}

Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    std::vector<double> d(a.space_->order() + 1);
    const double cycle[4] = {s, c, -s, -c};
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
    return a.compose(d);
}

Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    std::vector<double> d(a.space_->order() + 1);
    const double cycle[4] = {c, -s, -c, s};
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
    return a.compose(d);
}

}  // namespace anisoft
