#pragma once

#include <memory>
#include <span>
#include <vector>

namespace anisoft {

/// Multi-indices of total order <= K in n variables, graded then lexicographic,
/// with the truncated product table.
class JetSpace {
public:
    /// Shared instance per (n, K).
    static std::shared_ptr<const JetSpace> get(std::size_t n, int order);

    std::size_t vars() const noexcept { return n_; }
    int order() const noexcept { return K_; }
    std::size_t size() const noexcept { return index_.size(); }
    const std::vector<int>& multi_index(std::size_t i) const { return index_[i]; }
    /// Position of alpha; throws UsageError if |alpha| > K.
    std::size_t find(std::span<const int> alpha) const;

    struct Product {
        std::size_t left, right, out;
    };
    const std::vector<Product>& products() const noexcept { return products_; }

    JetSpace(std::size_t n, int order);

private:
    std::size_t n_;
    int K_;
    std::vector<std::vector<int>> index_;
    std::vector<Product> products_;
};

/// Truncated multivariate Taylor polynomial sum_alpha c_alpha h^alpha, with
/// c_alpha = D^alpha f(x0) / alpha!. Closed-form expressions evaluated on jets
/// give their derivatives through order K.
class Jet {
public:
    Jet(std::shared_ptr<const JetSpace> space, double value);
    /// The coordinate function x_axis around x0[axis] = value.
    static Jet variable(std::shared_ptr<const JetSpace> space, std::size_t axis, double value);

    const JetSpace& space() const noexcept { return *space_; }
    double value() const noexcept { return c_[0]; }
    std::span<const double> coefficients() const noexcept { return c_; }
    /// D^alpha f(x0).
    double derivative(std::span<const int> alpha) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator+=(double v);
    Jet& operator*=(double v);
    Jet operator-() const;

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator+(Jet a, double v) { return a += v; }
    friend Jet operator+(double v, Jet a) { return a += v; }
    friend Jet operator-(Jet a, double v) { return a += -v; }
    friend Jet operator-(double v, const Jet& a) { return -a + v; }
    friend Jet operator*(Jet a, double v) { return a *= v; }
    friend Jet operator*(double v, Jet a) { return a *= v; }
    friend Jet operator/(Jet a, double v) { return a *= 1.0 / v; }
    friend Jet operator/(double v, const Jet& a);

    friend Jet exp(const Jet& a);
    friend Jet sin(const Jet& a);
    friend Jet cos(const Jet& a);

    /// f(a) from the derivatives f^(k)(a.value()), k = 0..K.
    Jet compose(std::span<const double> derivatives) const;

private:
    std::shared_ptr<const JetSpace> space_;
    std::vector<double> c_;
};

/// Value accessor shared by double and Jet code paths.
inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

}  // namespace anisoft
