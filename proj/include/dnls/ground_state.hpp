#pragma once

// Explicit solitary waves of the quintic NLS with a delta point interaction,
// conserved functionals, the sharp Gagliardo-Nirenberg check, the
// pseudo-conformal blow-up solution, and the fixed-mass constrained
// minimizer behind the small-soliton existence statement.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dnls/grid.hpp"

namespace dnls {

struct GroundStateSpec {
    double omega = 1.0;
    double mu = 0.0;

    void validate() const {
        if (mu == 0.0) {
            if (!(omega > 0.0)) throw std::invalid_argument("ground state: omega must be positive");
        } else {
            // arctanh(mu / (2 sqrt(omega))) needs |mu| < 2 sqrt(omega)
            if (!(omega > 0.25 * mu * mu))
                throw std::invalid_argument("ground state: omega must exceed mu^2/4");
        }
    }
};

/// Q_{omega,mu}(x) = [3 omega sech^2(2 sqrt(omega)|x| + arctanh(mu/(2 sqrt(omega))))]^{1/4}.
inline double ground_state_value(const GroundStateSpec& s, double x) {
    const double r = 2.0 * std::sqrt(s.omega);
    const double shift = std::atanh(s.mu / r);
    const double sech = 1.0 / std::cosh(r * std::abs(x) + shift);
    return std::pow(3.0 * s.omega * sech * sech, 0.25);
}

inline RealField ground_state(const GroundStateSpec& s, const SpatialGrid& g) {
    s.validate();
    return sample_field<RealField>(g, [&](double x) { return ground_state_value(s, x); });
}

/// The free ground state Q (omega = 1, mu = 0): Q = 3^{1/4} sech^{1/2}(2x).
inline RealField free_ground_state(const SpatialGrid& g) {
    return ground_state(GroundStateSpec{1.0, 0.0}, g);
}

/// Closed-form derivative Q' = -Q tanh(2x); used where the O(h^2) stencil
/// error would swamp a tolerance (Pohozaev, quadrature identities).
inline RealField free_ground_state_derivative(const SpatialGrid& g) {
    return sample_field<RealField>(g, [&](double x) {
        const double sech = 1.0 / std::cosh(2.0 * x);
        return -std::pow(3.0 * sech * sech, 0.25) * std::tanh(2.0 * x);
    });
}

// ---------------------------------------------------------------------------
// Conserved functionals.
// ---------------------------------------------------------------------------

struct MassResult {
    double mass = 0.0;   // (1/2) \int |u|^2
    double l2sq = 0.0;   // \int |u|^2
};

inline MassResult mass(const ComplexField& u) {
    const double n2 = inner(u, u);
    return MassResult{0.5 * n2, n2};
}

inline MassResult mass(const RealField& u) {
    const double n2 = inner(u, u);
    return MassResult{0.5 * n2, n2};
}

/// E(u) = 1/2 |u'|_2^2 - (mu/2)|u(0)|^2 - 1/6 |u|_6^6, delta term through the
/// single-node pairing (exact in quadrature).
inline double energy(const ComplexField& u, double mu) {
    ComplexField du = first_derivative(u);
    double kin = 0.0, pot6 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = u.grid.weight(i);
        kin += w * std::norm(du.v[i]);
        const double a2 = std::norm(u.v[i]);
        pot6 += w * a2 * a2 * a2;
    }
    const double delta_term = 0.5 * mu * std::norm(u.at_origin());
    return 0.5 * kin - delta_term - pot6 / 6.0;
}

inline double energy(const RealField& u, double mu) { return energy(ComplexField(u), mu); }

/// Energy with an externally supplied derivative (closed-form derivatives
/// make the kinetic term spectrally accurate).
inline double energy_with_gradient(const ComplexField& u, const ComplexField& du, double mu) {
    double kin = 0.0, pot6 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = u.grid.weight(i);
        kin += w * std::norm(du.v[i]);
        const double a2 = std::norm(u.v[i]);
        pot6 += w * a2 * a2 * a2;
    }
    return 0.5 * kin - 0.5 * mu * std::norm(u.at_origin()) - pot6 / 6.0;
}

// ---------------------------------------------------------------------------
// Sharp Gagliardo-Nirenberg: |u|_6^6 <= (3/|Q|_2^4) |u|_2^4 |u'|_2^2,
// equality exactly on the Q orbit.
// ---------------------------------------------------------------------------

struct GNCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

inline double q_l2sq_exact() {
    return std::sqrt(3.0) * std::numbers::pi / 2.0;  // |Q|_2^2 = sqrt(3) pi / 2
}

inline GNCheck gn_check(const ComplexField& u) {
    const FieldNorms n = norms(u);
    if (n.l2 == 0.0) throw std::invalid_argument("gn_check: zero field");
    const double c_gn = 3.0 / (q_l2sq_exact() * q_l2sq_exact());
    GNCheck out;
    out.lhs = std::pow(n.l6, 6.0);
    out.rhs = c_gn * std::pow(n.l2, 4.0) * n.grad_l2 * n.grad_l2;
    out.ratio = out.lhs / out.rhs;
    return out;
}

inline GNCheck gn_check(const RealField& u) { return gn_check(ComplexField(u)); }

// ---------------------------------------------------------------------------
// Pseudo-conformal minimal-mass blow-up solution (mu = 0):
// S(t,x) = |t|^{-1/2} Q(x/|t|) e^{-i|x|^2/(4|t|)} e^{i/|t|},  t < 0.
// ---------------------------------------------------------------------------

inline ComplexField pseudoconformal_solution(double t, const SpatialGrid& g) {
    if (!(t < 0.0)) throw std::invalid_argument("pseudoconformal solution: t must be negative");
    const double at = -t;
    if (g.spacing / at > 0.2)
        throw resolution_floor_error("pseudoconformal solution: h/|t| > 0.2, profile unresolved");
    const double amp = 1.0 / std::sqrt(at);
    return sample_field<ComplexField>(g, [&](double x) {
        const double q = ground_state_value(GroundStateSpec{1.0, 0.0}, x / at);
        const double phase = -x * x / (4.0 * at) + 1.0 / at;
        return amp * q * std::polar(1.0, phase);
    });
}

// ---------------------------------------------------------------------------
// Fixed-mass minimization (normalized gradient flow).  Linear part treated
// implicitly so the nominal step is usable on fine grids; mass renormalized
// to M after every step.
// ---------------------------------------------------------------------------

struct MinimizerResult {
    RealField field;
    double omega = 0.0;
    double energy = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

// Thomas solve for a symmetric tridiagonal system with constant off-diagonal.
inline std::vector<double> solve_tridiag_const_off(const std::vector<double>& diag, double off,
                                                   const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace detail

inline MinimizerResult minimize_fixed_mass(double M, double mu, const SpatialGrid& g,
                                           double step0 = 1e-3, std::size_t max_iter = 200000) {
    if (!(mu > 0.0)) throw std::invalid_argument("minimize_fixed_mass: mu must be positive");
    const double m_thresh = std::sqrt(q_l2sq_exact());
    if (!(M > 0.0 && M < m_thresh))
        throw std::invalid_argument("minimize_fixed_mass: need 0 < M < |Q|_2");

    RealField u = free_ground_state(g);
    {
        const double n = l2_norm(u);
        for (auto& x : u.v) x *= M / n;
    }

    const double h = g.spacing;
    const double inv_h2 = 1.0 / (h * h);
    const std::size_t n = g.node_count;
    const std::size_t mid = g.origin_index();

    // Discrete Lagrange multiplier: omega |u|_2^2 = <u'' + mu delta u + u^5, u>
    //                                             = -|u'|_2^2 + mu u(0)^2 + \int u^6.
    auto multiplier = [&](const RealField& w) {
        RealField dw = first_derivative(w);
        double grad2 = inner(dw, dw);
        double pot6 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a2 = w.v[i] * w.v[i];
            pot6 += g.weight(i) * a2 * a2 * a2;
        }
        return (-grad2 + mu * w.at_origin() * w.at_origin() + pot6) / inner(w, w);
    };

    double tau = step0;
    double e_prev = energy(u, mu);
    double e_ref = e_prev;
    std::size_t since_ref = 0;
    std::size_t it = 0;

    std::vector<double> diag(n), rhs(n);
    for (; it < max_iter; ++it) {
        // Multiplier-shifted semi-implicit step,
        //   (I + tau (-D^2 - mu delta_h + omega)) u* = u + tau u^5,
        // whose fixed point is the discrete constrained critical point.
        const double omega = multiplier(u);
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = 1.0 + tau * (2.0 * inv_h2 + omega);
            const double ui = u.v[i];
            rhs[i] = ui + tau * ui * ui * ui * ui * ui;
        }
        diag[mid] -= tau * mu / h;
        RealField trial(g);
        trial.v = detail::solve_tridiag_const_off(diag, -tau * inv_h2, rhs);
        const double tn = l2_norm(trial);
        for (auto& x : trial.v) x *= M / tn;

        const double e_new = energy(trial, mu);
        if (e_new > e_prev + 1e-14 * std::abs(e_prev)) {
            tau *= 0.5;  // backtrack
            if (tau < 1e-10 * step0) break;
            continue;
        }
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::abs(trial.v[i] - u.v[i]));
        u = trial;
        e_prev = e_new;
        if (move <= 1e-13) break;
        ++since_ref;
        if (since_ref >= 100) {
            if (std::abs(e_ref - e_new) <= 1e-12 * std::abs(e_new)) break;
            e_ref = e_new;
            since_ref = 0;
        }
    }
    if (it >= max_iter)
        throw std::runtime_error("minimize_fixed_mass: no convergence within iteration cap");

    const double omega_final = multiplier(u);
    return MinimizerResult{std::move(u), omega_final, e_prev, it};
}

/// Root-solve omega so that |Q_{omega,mu}|_2 = M (bisection on the closed form).
inline double omega_for_mass(double M, double mu, const SpatialGrid& g) {
    auto mass_of = [&](double omega) {
        RealField q = ground_state(GroundStateSpec{omega, mu}, g);
        return l2_norm(q);
    };
    double lo = 0.25 * mu * mu * (1.0 + 1e-12) + 1e-12;
    double hi = std::max(4.0, mu * mu);
    while (mass_of(hi) < M) hi *= 2.0;  // mass grows with omega
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mass_of(mid) < M) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace dnls
