#pragma once

// Linearized operators around the free ground state,
//   L+ = -d^2/dy^2 + 1 - 5 Q^4,   L- = -d^2/dy^2 + 1 - Q^4,
// with even-sector solvers, the discrete L- kernel, the beta coefficient of
// the delta perturbation, and constrained coercivity gaps.
//
// Even functions are handled on the half line [0, L] with a Neumann
// reflection at the origin; this removes the odd kernel Q' of L+.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"

namespace dnls {

enum class LinKind { plus, minus };

struct LinearizedOperator {
    LinKind kind = LinKind::plus;
    SpatialGrid grid;
    RealField potential;  // 1 - 5 Q^4 or 1 - Q^4
};

inline LinearizedOperator make_linearized(LinKind kind, const SpatialGrid& g) {
    LinearizedOperator op;
    op.kind = kind;
    op.grid = g;
    const double c = (kind == LinKind::plus) ? 5.0 : 1.0;
    op.potential = sample_field<RealField>(g, [&](double y) {
        const double sech = 1.0 / std::cosh(2.0 * y);
        return 1.0 - c * 3.0 * sech * sech;  // Q^4 = 3 sech^2(2y)
    });
    return op;
}

template <class F>
inline F apply(const LinearizedOperator& op, const F& f) {
    require_same_grid(op.grid, f.grid);
    F out = second_derivative(f);
    for (std::size_t i = 0; i < f.size(); ++i)
        out.v[i] = -out.v[i] + op.potential.v[i] * f.v[i];
    return out;
}

namespace detail {

/// General tridiagonal Thomas solve (sub, diag, sup given per row).
inline std::vector<double> solve_tridiag(const std::vector<double>& sub,
                                         const std::vector<double>& diag,
                                         const std::vector<double>& sup,
                                         const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - sub[i] * c[i - 1];
        c[i] = (i + 1 < n) ? sup[i] / m : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace detail

/// L+ or L- restricted to even functions: half-line matrix with the
/// reflected (Neumann) origin row.  Self-adjoint w.r.t. the half weight at
/// the origin, which is exactly the full-line pairing of even functions.
class EvenSectorOperator {
public:
    EvenSectorOperator(LinKind kind, const SpatialGrid& g) : kind_(kind), grid_(g) {
        const std::size_t m = half_size();
        const double inv_h2 = 1.0 / (g.spacing * g.spacing);
        const double c = (kind == LinKind::plus) ? 5.0 : 1.0;
        sub_.assign(m, -inv_h2);
        sup_.assign(m, -inv_h2);
        diag_.assign(m, 0.0);
        sub_[0] = 0.0;
        sup_[0] = -2.0 * inv_h2;  // even reflection at the origin
        for (std::size_t j = 0; j < m; ++j) {
            const double y = double(j) * g.spacing;
            const double sech = 1.0 / std::cosh(2.0 * y);
            diag_[j] = 2.0 * inv_h2 + 1.0 - c * 3.0 * sech * sech;
        }
    }

    const SpatialGrid& grid() const { return grid_; }
    std::size_t half_size() const { return grid_.origin_index() + 1; }

    /// Half weight at the origin; pairing in which the matrix is symmetric.
    double wdot(const std::vector<double>& a, const std::vector<double>& b) const {
        double s = 0.5 * a[0] * b[0];
        for (std::size_t j = 1; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    }

    std::vector<double> apply_half(const std::vector<double>& u) const {
        const std::size_t m = u.size();
        std::vector<double> out(m);
        out[0] = diag_[0] * u[0] + sup_[0] * u[1];
        for (std::size_t j = 1; j + 1 < m; ++j)
            out[j] = sub_[j] * u[j - 1] + diag_[j] * u[j] + sup_[j] * u[j + 1];
        out[m - 1] = sub_[m - 1] * u[m - 2] + diag_[m - 1] * u[m - 1];
        return out;
    }

    std::vector<double> solve_half(std::vector<double> rhs, double shift = 0.0) const {
        if (shift == 0.0) return detail::solve_tridiag(sub_, diag_, sup_, rhs);
        std::vector<double> d = diag_;
        for (auto& x : d) x -= shift;
        return detail::solve_tridiag(sub_, d, sup_, rhs);
    }

    /// Restrict an even full-line field to [0, L], symmetrizing across 0.
    std::vector<double> to_half(const RealField& f) const {
        require_same_grid(grid_, f.grid);
        const std::size_t mid = grid_.origin_index();
        std::vector<double> h(half_size());
        for (std::size_t j = 0; j < h.size(); ++j)
            h[j] = (j == 0) ? f.v[mid] : 0.5 * (f.v[mid + j] + f.v[mid - j]);
        return h;
    }

    RealField to_full(const std::vector<double>& h) const {
        RealField f(grid_);
        const std::size_t mid = grid_.origin_index();
        for (std::size_t j = 0; j < h.size(); ++j) {
            f.v[mid + j] = h[j];
            f.v[mid - j] = h[j];
        }
        return f;
    }

    /// Discrete kernel direction (minus operator): inverse iteration from
    /// the sampled Q.  The continuous kernel is span{Q}; the discrete matrix
    /// has one eigenvalue O(h^2) whose eigenvector this returns, normalized
    /// to unit full-line L2 norm.
    RealField kernel() const {
        if (kind_ != LinKind::minus)
            throw std::logic_error("kernel(): only L- has an even-sector kernel");
        std::vector<double> q = to_half(free_ground_state(grid_));
        for (int it = 0; it < 8; ++it) {
            q = solve_half(q);
            const double n = std::sqrt(wdot(q, q));
            for (auto& x : q) x /= n;
        }
        RealField full = to_full(q);
        const double n = l2_norm(full);
        for (auto& x : full.v) x /= n;
        return full;
    }

    LinKind kind() const { return kind_; }

private:
    LinKind kind_;
    SpatialGrid grid_;
    std::vector<double> sub_, diag_, sup_;
};

/// Solve L+ f = g for even decaying g; L+ is invertible on the even sector.
inline RealField solve_plus(const RealField& g, const SpatialGrid& grid) {
    EvenSectorOperator op(LinKind::plus, grid);
    return op.to_full(op.solve_half(op.to_half(g)));
}

/// rho: the unique even solution of L+ rho = |y|^2 Q.
inline RealField rho_field(const SpatialGrid& grid) {
    return solve_plus(multiply_y2(free_ground_state(grid)), grid);
}

struct SolveMinusOptions {
    double tol_solv = 1e-8;  // allowed |<g,Q>| / |g|_2 before erroring
};

/// Solve L- f = g on the complement of the kernel.  Solvability <g, Q> = 0
/// is checked against the operator's own discrete kernel (= the sampled Q
/// up to O(h^2)); the right-hand side is projected onto its complement and
/// the output gauge-fixed against the same direction.
inline RealField solve_minus(const RealField& g, const SpatialGrid& grid,
                             const SolveMinusOptions& opt = {}) {
    EvenSectorOperator op(LinKind::minus, grid);
    const RealField ker = op.kernel();
    const double gq = inner(g, ker);
    const double gn = l2_norm(g);
    if (gn > 0.0 && std::abs(gq) > opt.tol_solv * gn)
        throw std::domain_error("solve_minus: solvability <g,Q>=0 violated");
    std::vector<double> kh = op.to_half(ker);
    std::vector<double> gh = op.to_half(g);

    const double knorm = op.wdot(kh, kh);
    const double proj = op.wdot(gh, kh) / knorm;
    for (std::size_t j = 0; j < gh.size(); ++j) gh[j] -= proj * kh[j];

    std::vector<double> fh = op.solve_half(gh);
    const double fit = op.wdot(fh, kh) / knorm;
    for (std::size_t j = 0; j < fh.size(); ++j) fh[j] -= fit * kh[j];
    return op.to_full(fh);
}

// ---------------------------------------------------------------------------
// beta = 2 mu Q(0)^2 / |yQ|_2^2, two ways.
// ---------------------------------------------------------------------------

/// Quadrature value of |yQ|_2^2 on a fine fixed grid (= sqrt(3) pi^3 / 32).
inline double yq_l2sq() {
    static const double value = [] {
        const SpatialGrid g(25.0, 50001);
        const RealField q = free_ground_state(g);
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double y = g.x(i);
            s += g.weight(i) * y * y * q.v[i] * q.v[i];
        }
        return s;
    }();
    return value;
}

/// Route (a): the closed formula.  Q(0)^2 = sqrt(3).
inline double beta_coefficient(double mu) {
    return 2.0 * mu * std::sqrt(3.0) / yq_l2sq();
}

/// Route (b): the solvability condition of the first profile block.  With
/// P+ = L+^{-1}(mu delta Q) + (beta/4) rho, beta is fixed by <P+, ker> = 0.
inline double beta_solvability(double mu, const SpatialGrid& grid) {
    const RealField q = free_ground_state(grid);
    const RealField f_delta = solve_plus(discrete_delta_apply(q, mu), grid);
    const RealField rho = rho_field(grid);
    const RealField ker = EvenSectorOperator(LinKind::minus, grid).kernel();
    return -4.0 * inner(f_delta, ker) / inner(rho, ker);
}

// ---------------------------------------------------------------------------
// Constrained coercivity gap: smallest Rayleigh quotient <L v, v>/<v, v>
// over even v orthogonal to the given constraint fields, by deflated
// inverse iteration (shift 0).
// ---------------------------------------------------------------------------

inline double coercivity_gap(LinKind kind, const std::vector<RealField>& constraints,
                             const SpatialGrid& grid, std::size_t max_iter = 400,
                             double tol = 1e-13) {
    EvenSectorOperator op(kind, grid);
    const std::size_t nc = constraints.size();
    if (nc > 2) throw std::logic_error("coercivity_gap: more than two constraints unsupported");

    std::vector<std::vector<double>> ch(nc);
    for (std::size_t i = 0; i < nc; ++i) ch[i] = op.to_half(constraints[i]);

    auto project = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < nc; ++i) {
            const double c = op.wdot(v, ch[i]) / op.wdot(ch[i], ch[i]);
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= c * ch[i][j];
        }
    };

    // One deflated shifted-inverse step: solve (A - sigma) z = v + sum nu_i c_i
    // with <z, c_i> = 0.
    auto deflated_step = [&](const std::vector<double>& v, double sigma) {
        std::vector<double> z = op.solve_half(v, sigma);
        if (nc > 0) {
            std::vector<std::vector<double>> aci(nc);
            std::vector<double> gram(nc * nc), rhs(nc), nu(nc);
            for (std::size_t i = 0; i < nc; ++i) aci[i] = op.solve_half(ch[i], sigma);
            for (std::size_t i = 0; i < nc; ++i)
                for (std::size_t j = 0; j < nc; ++j) gram[i * nc + j] = op.wdot(aci[j], ch[i]);
            for (std::size_t i = 0; i < nc; ++i) rhs[i] = -op.wdot(z, ch[i]);
            if (nc == 1) {
                nu[0] = rhs[0] / gram[0];
            } else {
                const double det = gram[0] * gram[3] - gram[1] * gram[2];
                nu[0] = (rhs[0] * gram[3] - gram[1] * rhs[1]) / det;
                nu[1] = (gram[0] * rhs[1] - rhs[0] * gram[2]) / det;
            }
            for (std::size_t i = 0; i < nc; ++i)
                for (std::size_t j = 0; j < z.size(); ++j) z[j] += nu[i] * aci[i][j];
        }
        project(z);
        const double nz = std::sqrt(op.wdot(z, z));
        for (auto& x : z) x /= nz;
        return z;
    };
    auto rayleigh = [&](const std::vector<double>& v) {
        const std::vector<double> av = op.apply_half(v);
        return op.wdot(av, v);
    };

    // Start direction: a generic even decaying bump, constraint-projected.
    std::vector<double> v0(op.half_size());
    for (std::size_t j = 0; j < v0.size(); ++j) {
        const double y = double(j) * grid.spacing;
        v0[j] = (1.0 + 0.3 * y) * std::exp(-0.7 * y);
    }
    project(v0);
    {
        const double nv = std::sqrt(op.wdot(v0, v0));
        for (auto& x : v0) x /= nv;
    }

    // Pass A: shift far below the spectrum; locks quickly onto a negative
    // minimum when one survives the constraints.
    double vmin = 1.0;
    for (std::size_t j = 0; j < op.half_size(); ++j) {
        const double y = double(j) * grid.spacing;
        const double sech = 1.0 / std::cosh(2.0 * y);
        const double c = (kind == LinKind::plus) ? 5.0 : 1.0;
        vmin = std::min(vmin, 1.0 - c * 3.0 * sech * sech);
    }
    const double sigma_low = vmin - 1.0;
    std::vector<double> va = v0;
    for (int it = 0; it < 80; ++it) va = deflated_step(va, sigma_low);
    const double theta_a = rayleigh(va);

    // Pass B: deflated inverse iteration at shift 0 converges to the
    // eigenvalue of smallest magnitude, which is the minimum whenever the
    // constrained form is nonnegative.
    std::vector<double> vb = v0;
    double theta_b = 0.0;
    bool converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        vb = deflated_step(vb, 0.0);
        const double theta_new = rayleigh(vb);
        if (it > 2 && std::abs(theta_new - theta_b) <= tol * std::max(1.0, std::abs(theta_new))) {
            theta_b = theta_new;
            converged = true;
            break;
        }
        theta_b = theta_new;
    }
    if (!converged) throw std::runtime_error("coercivity_gap: inverse iteration did not converge");

    // Any Rayleigh quotient bounds the minimum from above: pass A beating
    // pass B means a lower (negative) branch exists; refine it locally.
    if (theta_a < theta_b - 1e-8 * std::max(1.0, std::abs(theta_b))) {
        double theta = theta_a;
        for (int it = 0; it < 60; ++it) {
            va = deflated_step(va, theta);
            const double theta_new = rayleigh(va);
            const bool done = std::abs(theta_new - theta) <= tol * std::max(1.0, std::abs(theta_new));
            theta = theta_new;
            if (done) break;
        }
        return theta;
    }
    return theta_b;
}

}  // namespace dnls
