#pragma once

// Discretization substrate: uniform symmetric 1D grid with trapezoid
// quadrature, Dirichlet-closed difference stencils, the scaling generator
// Lambda = 1/2 + y d/dy, and the single-node Dirac delta.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dnls {

using complexd = std::complex<double>;

/// Error raised when a requested scale cannot be represented on the grid
/// (e.g. a rescaled profile narrower than a few cells).
class resolution_floor_error : public std::runtime_error {
public:
    explicit resolution_floor_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Uniform symmetric grid on [-L, L] with an odd node count, so the origin
/// is a node. Cheap value type; fields carry a copy.
struct SpatialGrid {
    double half_width = 20.0;  // L
    std::size_t node_count = 4001;  // N, odd
    double spacing = 0.01;  // h = 2L/(N-1)

    SpatialGrid() = default;

    SpatialGrid(double L, std::size_t N)
        : half_width(L), node_count(N), spacing(2.0 * L / double(N - 1)) {
        if (N < 3 || N % 2 == 0)
            throw std::invalid_argument("grid: node count must be odd and >= 3");
        if (!(L > 0.0))
            throw std::invalid_argument("grid: half width must be positive");
    }

    double x(std::size_t i) const { return -half_width + double(i) * spacing; }
    std::size_t origin_index() const { return (node_count - 1) / 2; }

    /// Trapezoid weight: h inside, h/2 at the two ends.
    double weight(std::size_t i) const {
        return (i == 0 || i + 1 == node_count) ? 0.5 * spacing : spacing;
    }

    bool same(const SpatialGrid& o) const {
        return node_count == o.node_count && half_width == o.half_width;
    }
};

inline void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
    if (!a.same(b)) throw std::invalid_argument("grid mismatch between fields");
}

/// Grid function with real samples. Dirichlet closure: values beyond the
/// ends are treated as 0 by every stencil.
struct RealField {
    SpatialGrid grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(const SpatialGrid& g) : grid(g), v(g.node_count, 0.0) {}
    std::size_t size() const { return v.size(); }
    double at_origin() const { return v[grid.origin_index()]; }
};

/// Grid function with complex samples.
struct ComplexField {
    SpatialGrid grid;
    std::vector<complexd> v;

    ComplexField() = default;
    explicit ComplexField(const SpatialGrid& g) : grid(g), v(g.node_count, complexd{0.0, 0.0}) {}
    explicit ComplexField(const RealField& f) : grid(f.grid), v(f.v.size()) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.v[i];
    }
    std::size_t size() const { return v.size(); }
    complexd at_origin() const { return v[grid.origin_index()]; }
};

template <class F, class Fn>
inline F sample_field(const SpatialGrid& g, Fn&& fn) {
    F out(g);
    for (std::size_t i = 0; i < g.node_count; ++i) out.v[i] = fn(g.x(i));
    return out;
}

inline RealField real_part(const ComplexField& u) {
    RealField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u.v[i].real();
    return out;
}

inline RealField imag_part(const ComplexField& u) {
    RealField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u.v[i].imag();
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature pairings.  <u,v> = Re \int u conj(v) via the trapezoid rule.
// ---------------------------------------------------------------------------

inline double inner(const ComplexField& u, const ComplexField& v) {
    require_same_grid(u.grid, v.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += u.grid.weight(i) * (u.v[i].real() * v.v[i].real() + u.v[i].imag() * v.v[i].imag());
    return s;
}

inline double inner(const RealField& u, const RealField& v) {
    require_same_grid(u.grid, v.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u.grid.weight(i) * u.v[i] * v.v[i];
    return s;
}

inline double inner(const RealField& u, const ComplexField& v) {
    require_same_grid(u.grid, v.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u.grid.weight(i) * u.v[i] * v.v[i].real();
    return s;
}

inline double inner(const ComplexField& u, const RealField& v) { return inner(v, u); }

/// \int f dx (plain trapezoid integral of a real field).
inline double integrate(const RealField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.grid.weight(i) * f.v[i];
    return s;
}

// ---------------------------------------------------------------------------
// Stencils.  Centered, second order, Dirichlet ends.
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
inline std::vector<T> second_derivative_values(const SpatialGrid& g, const std::vector<T>& u) {
    const double inv_h2 = 1.0 / (g.spacing * g.spacing);
    const std::size_t n = u.size();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const T left = (i == 0) ? T{} : u[i - 1];
        const T right = (i + 1 == n) ? T{} : u[i + 1];
        out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
    return out;
}

// Centered interior stencil; one-sided at the two boundary nodes, where
// decaying fields are ~0 anyway.
template <class T>
inline std::vector<T> first_derivative_values(const SpatialGrid& g, const std::vector<T>& u) {
    const double inv_2h = 0.5 / g.spacing;
    const double inv_h = 1.0 / g.spacing;
    const std::size_t n = u.size();
    std::vector<T> out(n);
    out[0] = (u[1] - u[0]) * inv_h;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv_2h;
    out[n - 1] = (u[n - 1] - u[n - 2]) * inv_h;
    return out;
}

}  // namespace detail

inline ComplexField second_derivative(const ComplexField& u) {
    ComplexField out(u.grid);
    out.v = detail::second_derivative_values(u.grid, u.v);
    return out;
}

inline RealField second_derivative(const RealField& u) {
    RealField out(u.grid);
    out.v = detail::second_derivative_values(u.grid, u.v);
    return out;
}

inline ComplexField first_derivative(const ComplexField& u) {
    ComplexField out(u.grid);
    out.v = detail::first_derivative_values(u.grid, u.v);
    return out;
}

inline RealField first_derivative(const RealField& u) {
    RealField out(u.grid);
    out.v = detail::first_derivative_values(u.grid, u.v);
    return out;
}

/// Lambda u = u/2 + y u'.
template <class F>
inline F lambda_op(const F& u) {
    F du = first_derivative(u);
    F out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i)
        out.v[i] = 0.5 * u.v[i] + u.grid.x(i) * du.v[i];
    return out;
}

/// mu * delta applied to u: (mu/h) u(0) at the origin node, 0 elsewhere,
/// so that <delta u, v> = mu Re(u(0) conj(v(0))) exactly in quadrature.
template <class F>
inline F discrete_delta_apply(const F& u, double mu) {
    F out(u.grid);
    out.v[u.grid.origin_index()] = (mu / u.grid.spacing) * u.v[u.grid.origin_index()];
    return out;
}

/// y^2 u / 4 (the conformal multiplier in the profile systems).
template <class F>
inline F quarter_y2(const F& u) {
    F out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double y = u.grid.x(i);
        out.v[i] = 0.25 * y * y * u.v[i];
    }
    return out;
}

template <class F>
inline F multiply_y2(const F& u) {
    F out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double y = u.grid.x(i);
        out.v[i] = y * y * u.v[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Norms.
// ---------------------------------------------------------------------------

struct FieldNorms {
    double l2 = 0.0;
    double l6 = 0.0;
    double grad_l2 = 0.0;
    double h1 = 0.0;
};

inline FieldNorms norms(const ComplexField& u) {
    FieldNorms n;
    double s2 = 0.0, s6 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a2 = std::norm(u.v[i]);
        const double w = u.grid.weight(i);
        s2 += w * a2;
        s6 += w * a2 * a2 * a2;
    }
    ComplexField du = first_derivative(u);
    double g2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) g2 += u.grid.weight(i) * std::norm(du.v[i]);
    n.l2 = std::sqrt(s2);
    n.l6 = std::pow(s6, 1.0 / 6.0);
    n.grad_l2 = std::sqrt(g2);
    n.h1 = std::sqrt(s2 + g2);
    return n;
}

inline FieldNorms norms(const RealField& u) { return norms(ComplexField(u)); }

inline double l2_norm(const ComplexField& u) { return std::sqrt(inner(u, u)); }
inline double l2_norm(const RealField& u) { return std::sqrt(inner(u, u)); }

// ---------------------------------------------------------------------------
// Small field algebra used throughout the profile and modulation code.
// ---------------------------------------------------------------------------

template <class F>
inline F scaled(const F& u, double c) {
    F out = u;
    for (auto& x : out.v) x *= c;
    return out;
}

inline ComplexField scaled(const ComplexField& u, complexd c) {
    ComplexField out = u;
    for (auto& x : out.v) x *= c;
    return out;
}

template <class F>
inline F added(const F& a, const F& b, double cb = 1.0) {
    require_same_grid(a.grid, b.grid);
    F out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += cb * b.v[i];
    return out;
}

inline ComplexField conj_field(const ComplexField& u) {
    ComplexField out = u;
    for (auto& x : out.v) x = std::conj(x);
    return out;
}

inline ComplexField multiply_i(const ComplexField& u) {
    ComplexField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = complexd{0.0, 1.0} * u.v[i];
    return out;
}

namespace detail {

/// 4-point Lagrange (cubic) interpolation on the uniform grid; zero outside
/// the domain, linear fallback on the outermost cells.
inline complexd interp_cubic(const ComplexField& f, double x) {
    const SpatialGrid& g = f.grid;
    const double pos = (x + g.half_width) / g.spacing;
    if (pos < 1.0 || pos > double(g.node_count - 3)) {
        if (pos < 0.0 || pos > double(g.node_count - 1)) return {};
        const std::ptrdiff_t i0 = std::ptrdiff_t(pos);
        if (std::size_t(i0 + 1) >= g.node_count) return f.v[g.node_count - 1];
        const double w = pos - double(i0);
        return (1.0 - w) * f.v[i0] + w * f.v[i0 + 1];
    }
    const std::size_t i1 = std::size_t(pos);
    const double s = pos - double(i1);
    const complexd fm1 = f.v[i1 - 1], f0 = f.v[i1], f1 = f.v[i1 + 1], f2 = f.v[i1 + 2];
    const double c_m1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double c_0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double c_1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double c_2 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return c_m1 * fm1 + c_0 * f0 + c_1 * f1 + c_2 * f2;
}

}  // namespace detail

}  // namespace dnls
