#pragma once

// Truncated formal power series in the two slow parameters (b, lambda) with
// complex grid-function coefficients.  Multiplication discards monomials
// whose total degree exceeds the truncation; conjugation conjugates the
// coefficient fields and leaves the (m, n) indices alone (b and lambda are
// real formal variables).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

/// Scalar-coefficient series in (b, lambda); used for theta.
struct ScalarSeries {
    int max_degree = 0;
    std::vector<double> c;  // dense (max_degree+1)^2 layout, m*(D+1)+n

    ScalarSeries() = default;
    explicit ScalarSeries(int D) : max_degree(D), c(std::size_t(D + 1) * std::size_t(D + 1), 0.0) {}

    double get(int m, int n) const {
        if (m < 0 || n < 0 || m + n > max_degree) return 0.0;
        return c[std::size_t(m) * (max_degree + 1) + n];
    }
    void set(int m, int n, double v) {
        if (m < 0 || n < 0 || m + n > max_degree)
            throw std::out_of_range("scalar series: monomial outside truncation");
        c[std::size_t(m) * (max_degree + 1) + n] = v;
    }
    double eval(double b, double lambda) const {
        double s = 0.0;
        for (int m = 0; m <= max_degree; ++m)
            for (int n = 0; n + m <= max_degree; ++n) {
                const double v = get(m, n);
                if (v != 0.0) s += v * std::pow(b, m) * std::pow(lambda, n);
            }
        return s;
    }
};

class BivariateSeries {
public:
    BivariateSeries() = default;

    BivariateSeries(const SpatialGrid& g, int max_degree)
        : grid_(g), D_(max_degree), coeff_(count(max_degree)) {}

    const SpatialGrid& grid() const { return grid_; }
    int max_degree() const { return D_; }

    bool has(int m, int n) const { return m >= 0 && n >= 0 && m + n <= D_; }

    ComplexField coeff(int m, int n) const {
        ensure(m, n);
        const auto& f = coeff_[index(m, n)];
        return f.v.empty() ? ComplexField(grid_) : f;
    }

    void set_coeff(int m, int n, ComplexField f) {
        ensure(m, n);
        require_same_grid(grid_, f.grid);
        coeff_[index(m, n)] = std::move(f);
    }

    void add_coeff(int m, int n, const ComplexField& f, complexd scale = {1.0, 0.0}) {
        ensure(m, n);
        auto& dst = coeff_[index(m, n)];
        if (dst.v.empty()) dst = ComplexField(grid_);
        for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += scale * f.v[i];
    }

    bool empty_at(int m, int n) const { return coeff_[index(m, n)].v.empty(); }

    BivariateSeries operator+(const BivariateSeries& o) const {
        check_compatible(o);
        BivariateSeries out = *this;
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n)
                if (!o.empty_at(m, n)) out.add_coeff(m, n, o.coeff_[o.index(m, n)]);
        return out;
    }

    BivariateSeries operator-(const BivariateSeries& o) const {
        check_compatible(o);
        BivariateSeries out = *this;
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n)
                if (!o.empty_at(m, n)) out.add_coeff(m, n, o.coeff_[o.index(m, n)], {-1.0, 0.0});
        return out;
    }

    BivariateSeries scaled_by(complexd c) const {
        BivariateSeries out = *this;
        for (auto& f : out.coeff_)
            for (auto& x : f.v) x *= c;
        return out;
    }

    /// Truncated Cauchy product with pointwise field multiplication.
    BivariateSeries operator*(const BivariateSeries& o) const {
        check_compatible(o);
        BivariateSeries out(grid_, D_);
        const std::size_t npts = grid_.node_count;
        for (int m1 = 0; m1 <= D_; ++m1)
            for (int n1 = 0; n1 + m1 <= D_; ++n1) {
                if (empty_at(m1, n1)) continue;
                const auto& a = coeff_[index(m1, n1)];
                for (int m2 = 0; m1 + m2 <= D_; ++m2)
                    for (int n2 = 0; m1 + n1 + m2 + n2 <= D_; ++n2) {
                        if (o.empty_at(m2, n2)) continue;
                        const auto& b = o.coeff_[o.index(m2, n2)];
                        auto& dst = out.coeff_[out.index(m1 + m2, n1 + n2)];
                        if (dst.v.empty()) dst = ComplexField(grid_);
                        for (std::size_t i = 0; i < npts; ++i) dst.v[i] += a.v[i] * b.v[i];
                    }
            }
        return out;
    }

    BivariateSeries conjugated() const {
        BivariateSeries out = *this;
        for (auto& f : out.coeff_)
            for (auto& x : f.v) x = std::conj(x);
        return out;
    }

    /// Multiply by b^dm lambda^dn; monomials pushed past the truncation drop.
    BivariateSeries shifted(int dm, int dn) const {
        BivariateSeries out(grid_, D_);
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n) {
                if (empty_at(m, n) || m + dm + n + dn > D_) continue;
                out.coeff_[out.index(m + dm, n + dn)] = coeff_[index(m, n)];
            }
        return out;
    }

    BivariateSeries d_db() const {
        BivariateSeries out(grid_, D_);
        for (int m = 1; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n) {
                if (empty_at(m, n)) continue;
                out.add_coeff(m - 1, n, coeff_[index(m, n)], {double(m), 0.0});
            }
        return out;
    }

    BivariateSeries d_dlambda() const {
        BivariateSeries out(grid_, D_);
        for (int m = 0; m <= D_; ++m)
            for (int n = 1; n + m <= D_; ++n) {
                if (empty_at(m, n)) continue;
                out.add_coeff(m, n - 1, coeff_[index(m, n)], {double(n), 0.0});
            }
        return out;
    }

    BivariateSeries scalar_multiplied(const ScalarSeries& s) const {
        BivariateSeries out(grid_, D_);
        for (int m1 = 0; m1 <= D_; ++m1)
            for (int n1 = 0; n1 + m1 <= D_; ++n1) {
                if (empty_at(m1, n1)) continue;
                const auto& a = coeff_[index(m1, n1)];
                for (int m2 = 0; m1 + m2 <= D_; ++m2)
                    for (int n2 = 0; m1 + n1 + m2 + n2 <= D_; ++n2) {
                        const double sv = s.get(m2, n2);
                        if (sv == 0.0) continue;
                        out.add_coeff(m1 + m2, n1 + n2, a, {sv, 0.0});
                    }
            }
        return out;
    }

    /// Apply a field-to-field linear map to every coefficient.
    template <class Fn>
    BivariateSeries mapped(Fn&& fn) const {
        BivariateSeries out(grid_, D_);
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n) {
                if (empty_at(m, n)) continue;
                out.set_coeff(m, n, fn(coeff_[index(m, n)]));
            }
        return out;
    }

    ComplexField eval(double b, double lambda) const {
        ComplexField out(grid_);
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n) {
                if (empty_at(m, n)) continue;
                const double w = std::pow(b, m) * std::pow(lambda, n);
                if (w == 0.0) continue;
                const auto& f = coeff_[index(m, n)];
                for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += w * f.v[i];
            }
        return out;
    }

    /// Evaluation with a monomial excluded (used to drop the (0,0) slot,
    /// which carries only the O(h^2) residue of the Q equation).
    ComplexField eval_excluding(double b, double lambda, int m_skip, int n_skip) const {
        ComplexField out(grid_);
        for (int m = 0; m <= D_; ++m)
            for (int n = 0; n + m <= D_; ++n) {
                if (empty_at(m, n) || (m == m_skip && n == n_skip)) continue;
                const double w = std::pow(b, m) * std::pow(lambda, n);
                if (w == 0.0) continue;
                const auto& f = coeff_[index(m, n)];
                for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += w * f.v[i];
            }
        return out;
    }

private:
    static std::size_t count(int D) { return std::size_t(D + 1) * std::size_t(D + 1); }
    std::size_t index(int m, int n) const { return std::size_t(m) * (D_ + 1) + n; }
    void ensure(int m, int n) const {
        if (!has(m, n)) throw std::out_of_range("series: monomial outside truncation");
    }
    void check_compatible(const BivariateSeries& o) const {
        if (D_ != o.D_ || !grid_.same(o.grid_))
            throw std::invalid_argument("series: incompatible operands");
    }

    SpatialGrid grid_;
    int D_ = 0;
    std::vector<ComplexField> coeff_;  // sparse: empty vector means zero
};

}  // namespace dnls
