#pragma once

// Modulation decomposition u = lambda^{-1/2}(P_b + eps) e^{i gamma}(x/lambda)
// through the three orthogonality pairings
//   <eps, i Lambda P_b> = <eps, |y|^2 P_b> = <eps, i rho_b> = 0,
// plus the Mod(s) time series and the Energy-Morawetz diagnostics H, J, S.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/profile.hpp"

namespace dnls {

struct ModulationState {
    double lambda = 1.0;
    double b = 0.0;
    double gamma = 0.0;
    double s = 0.0;
    double t = 0.0;
};

struct Decomposition {
    ModulationState state;
    ComplexField epsilon;       // on the rescaled grid
    double residual[3] = {0, 0, 0};  // the three pairings at convergence
    double eps_pb_pairing = 0.0;     // <eps, P_b>
    std::size_t iterations = 0;
};

// ---------------------------------------------------------------------------
// Localized Morawetz weight.  phi'(r) = r below 1 and 3 - e^{-r} above 2;
// a quintic bridges phi' on [1, 2] with value/slope/curvature matched at
// both ends, which keeps phi convex.  (Matching phi itself across the two
// printed branches is impossible for a convex function; only derivatives of
// phi_A enter the functionals, so the outer branch carries the additive
// constant that makes phi C^1.)
// ---------------------------------------------------------------------------

class MorawetzWeight {
public:
    explicit MorawetzWeight(double A = 20.0) : A_(A) {
        if (!(A > 1.0)) throw std::invalid_argument("morawetz weight: need A > 1");
        const double e2 = std::exp(-2.0);
        a5_ = 0.5 * (18.0 - 19.0 * e2);
        a4_ = 4.0 * e2 - 4.0 - 2.0 * a5_;
        a3_ = (1.0 - e2) - a4_ - a5_;
        // Convexity of the bridge, asserted at construction.
        for (int i = 0; i <= 1000; ++i) {
            if (dphi1(1.0 + double(i) / 1000.0) < -1e-12)
                throw std::logic_error("morawetz weight: bridge lost convexity");
        }
        phi2_ = phi1_at(2.0);
    }

    double A() const { return A_; }

    // phi_A(x) = A^2 phi(x/A) and its derivatives.
    double phi(double x) const { return A_ * A_ * phi1(std::abs(x) / A_); }
    double dphi(double x) const {
        const double s = x < 0.0 ? -1.0 : 1.0;
        return s * A_ * phi1d(std::abs(x) / A_);
    }
    double d2phi(double x) const { return dphi1(std::abs(x) / A_); }
    double d4phi(double x) const { return d3phi1(std::abs(x) / A_) / (A_ * A_); }

private:
    // phi'(r) on the unit-scale profile.
    double phi1d(double r) const {
        if (r <= 1.0) return r;
        if (r >= 2.0) return 3.0 - std::exp(-r);
        const double t = r - 1.0;
        return 1.0 + t + t * t * t * (a3_ + t * (a4_ + t * a5_));
    }
    // phi''(r).
    double dphi1(double r) const {
        if (r <= 1.0) return 1.0;
        if (r >= 2.0) return std::exp(-r);
        const double t = r - 1.0;
        return 1.0 + t * t * (3.0 * a3_ + t * (4.0 * a4_ + t * 5.0 * a5_));
    }
    // phi''''(r).
    double d3phi1(double r) const {
        if (r <= 1.0) return 0.0;
        if (r >= 2.0) return std::exp(-r);
        const double t = r - 1.0;
        return 6.0 * a3_ + t * (24.0 * a4_ + t * 60.0 * a5_);
    }
    double phi1_at(double r) const {
        // integral of phi1d from 0, valid for r in [1, 2]
        const double t = r - 1.0;
        return 0.5 + t + 0.5 * t * t +
               t * t * t * t * (a3_ / 4.0 + t * (a4_ / 5.0 + t * a5_ / 6.0));
    }
    double phi1(double r) const {
        if (r <= 1.0) return 0.5 * r * r;
        if (r <= 2.0) return phi1_at(r);
        return phi2_ + (3.0 * r + std::exp(-r)) - (6.0 + std::exp(-2.0));
    }

    double A_ = 20.0;
    double a3_ = 0.0, a4_ = 0.0, a5_ = 0.0;
    double phi2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Decomposition by Newton iteration on (lambda, b, gamma).
// ---------------------------------------------------------------------------

namespace detail {

struct PairingContext {
    const ProfileCoefficients* coeffs;
    const ComplexField* u;
};

inline ComplexField epsilon_of(const PairingContext& ctx, double lambda, double b, double gamma) {
    const SpatialGrid& yg = ctx.coeffs->grid();
    ComplexField pb = ctx.coeffs->eval_Pb(b, lambda);
    ComplexField eps(yg);
    const complexd rot = std::polar(std::sqrt(lambda), -gamma);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = lambda * yg.x(i);
        eps.v[i] = rot * interp_cubic(*ctx.u, x) - pb.v[i];
    }
    return eps;
}

inline void pairings_of(const PairingContext& ctx, double lambda, double b, double gamma,
                        double out[3]) {
    const ComplexField eps = epsilon_of(ctx, lambda, b, gamma);
    const ComplexField pb = ctx.coeffs->eval_Pb(b, lambda);
    const ComplexField lam_pb = lambda_op(pb);
    out[0] = inner(eps, multiply_i(lam_pb));
    out[1] = inner(eps, multiply_y2(pb));
    ComplexField rho_b(ctx.coeffs->grid());
    const RealField& rho = ctx.coeffs->rho();
    for (std::size_t i = 0; i < rho_b.size(); ++i) {
        const double y = ctx.coeffs->grid().x(i);
        rho_b.v[i] = complexd{0.0, 1.0} * std::polar(rho.v[i], -0.25 * b * y * y);
    }
    out[2] = inner(eps, rho_b);
}

}  // namespace detail

inline Decomposition decompose(const ComplexField& u, const ModulationState& guess,
                               const ProfileCoefficients& coeffs, std::size_t max_iter = 50) {
    if (!(guess.lambda >= 50.0 * u.grid.spacing))
        throw resolution_floor_error("decompose: guess lambda below 50 h on the physical grid");

    detail::PairingContext ctx{&coeffs, &u};
    double lambda = guess.lambda, b = guess.b, gamma = guess.gamma;
    const double tol = 1e-10 * l2_norm(u) * std::max(1.0, l2_norm(coeffs.rho()));

    double r[3];
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        detail::pairings_of(ctx, lambda, b, gamma, r);
        const double rn = std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]);
        if (rn <= tol) break;

        // Jacobian by central differences.
        const double dl = 1e-6 * lambda, db = 1e-6 * std::max(std::abs(b), 1e-2), dg = 1e-6;
        double Jp[3], Jm[3], J[3][3];
        detail::pairings_of(ctx, lambda + dl, b, gamma, Jp);
        detail::pairings_of(ctx, lambda - dl, b, gamma, Jm);
        for (int i = 0; i < 3; ++i) J[i][0] = (Jp[i] - Jm[i]) / (2.0 * dl);
        detail::pairings_of(ctx, lambda, b + db, gamma, Jp);
        detail::pairings_of(ctx, lambda, b - db, gamma, Jm);
        for (int i = 0; i < 3; ++i) J[i][1] = (Jp[i] - Jm[i]) / (2.0 * db);
        detail::pairings_of(ctx, lambda, b, gamma + dg, Jp);
        detail::pairings_of(ctx, lambda, b, gamma - dg, Jm);
        for (int i = 0; i < 3; ++i) J[i][2] = (Jp[i] - Jm[i]) / (2.0 * dg);

        // Cramer solve J dx = -r.
        const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                           J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                           J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
        if (det == 0.0) throw std::runtime_error("decompose: singular Newton system");
        auto det3 = [&](int col) {
            double M[3][3];
            for (int i = 0; i < 3; ++i)
                for (int jc = 0; jc < 3; ++jc) M[i][jc] = (jc == col) ? -r[i] : J[i][jc];
            return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                   M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                   M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        };
        double step_l = det3(0) / det, step_b = det3(1) / det, step_g = det3(2) / det;
        double damp = 1.0;
        while (lambda + damp * step_l <= 0.0) damp *= 0.5;
        lambda += damp * step_l;
        b += damp * step_b;
        gamma += damp * step_g;
    }
    if (it >= max_iter)
        throw std::runtime_error("decompose: Newton did not converge (outside the tube?)");

    Decomposition d;
    d.state = guess;
    d.state.lambda = lambda;
    d.state.b = b;
    d.state.gamma = gamma;
    d.epsilon = detail::epsilon_of(ctx, lambda, b, gamma);
    detail::pairings_of(ctx, lambda, b, gamma, d.residual);
    d.eps_pb_pairing = inner(d.epsilon, coeffs.eval_Pb(b, lambda));
    d.iterations = it;
    return d;
}

// ---------------------------------------------------------------------------
// Mod(s) = (lambda_s/lambda + b, b_s + b^2 - theta, 1 - gamma_s) along a
// fitted trajectory; s reconstructed by the trapezoid of 1/lambda^2 in t.
// ---------------------------------------------------------------------------

struct ModSample {
    double s = 0.0;
    double mod1 = 0.0, mod2 = 0.0, mod3 = 0.0;
};

inline std::vector<double> reconstruct_s(const std::vector<Decomposition>& traj, double s_first) {
    std::vector<double> s(traj.size());
    if (traj.empty()) return s;
    s[0] = s_first;
    for (std::size_t n = 1; n < traj.size(); ++n) {
        const double dt = traj[n].state.t - traj[n - 1].state.t;
        const double il0 = 1.0 / (traj[n - 1].state.lambda * traj[n - 1].state.lambda);
        const double il1 = 1.0 / (traj[n].state.lambda * traj[n].state.lambda);
        s[n] = s[n - 1] + 0.5 * dt * (il0 + il1);
    }
    return s;
}

inline std::vector<ModSample> mod_vector(const std::vector<Decomposition>& traj,
                                         const ProfileCoefficients& coeffs, double s_first) {
    if (traj.size() < 3) throw std::invalid_argument("mod_vector: need at least 3 samples");
    const std::vector<double> s = reconstruct_s(traj, s_first);

    auto deriv = [&](auto&& get, std::size_t n) {
        if (n == 0) return (get(1) - get(0)) / (s[1] - s[0]);
        if (n + 1 == traj.size()) return (get(n) - get(n - 1)) / (s[n] - s[n - 1]);
        const double hp = s[n + 1] - s[n], hm = s[n] - s[n - 1];
        return (hm * hm * get(n + 1) - hp * hp * get(n - 1) - (hm * hm - hp * hp) * get(n)) /
               (hp * hm * (hp + hm));
    };

    std::vector<ModSample> out(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const double lam = traj[n].state.lambda;
        const double b = traj[n].state.b;
        const double lam_s = deriv([&](std::size_t i) { return traj[i].state.lambda; }, n);
        const double b_s = deriv([&](std::size_t i) { return traj[i].state.b; }, n);
        const double gam_s = deriv([&](std::size_t i) { return traj[i].state.gamma; }, n);
        out[n].s = s[n];
        out[n].mod1 = lam_s / lam + b;
        out[n].mod2 = b_s + b * b - coeffs.eval_theta(b, lam);
        out[n].mod3 = 1.0 - gam_s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Energy-Morawetz diagnostics.
// ---------------------------------------------------------------------------

/// H = 1/2 |d eps|^2 + 1/2 |eps|^2 - \int (F(P_b+eps) - F(P_b) - dF(P_b) eps)
///     - lambda \int (G(P_b+eps) - G(P_b) - dG(P_b) eps);
/// the delta part collapses to (lambda mu / 2) |eps(0)|^2.
inline double functional_H(const ComplexField& eps, double b, double lambda,
                           const ProfileCoefficients& coeffs, double mu) {
    const ComplexField pb = coeffs.eval_Pb(b, lambda);
    const ComplexField deps = first_derivative(eps);
    const SpatialGrid& g = eps.grid;
    double quad = 0.0, cubic = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double w = g.weight(i);
        quad += w * (std::norm(deps.v[i]) + std::norm(eps.v[i]));
        const complexd p = pb.v[i], e = eps.v[i];
        const double ap2 = std::norm(p);
        const double as2 = std::norm(p + e);
        const double fp = ap2 * ap2 * ap2 / 6.0;
        const double fs = as2 * as2 * as2 / 6.0;
        const double df = ap2 * ap2 * (p.real() * e.real() + p.imag() * e.imag());
        cubic += w * (fs - fp - df);
    }
    const double g_delta = 0.5 * lambda * mu * std::norm(eps.at_origin());
    return 0.5 * quad - cubic - g_delta;
}

/// J = 1/2 Im \int phi_A' d_y(eps) conj(eps).
inline double functional_J(const ComplexField& eps, const MorawetzWeight& w) {
    const ComplexField deps = first_derivative(eps);
    const SpatialGrid& g = eps.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i)
        s += g.weight(i) * w.dphi(g.x(i)) * std::imag(deps.v[i] * std::conj(eps.v[i]));
    return 0.5 * s;
}

inline double functional_S(const ComplexField& eps, const ModulationState& st,
                           const MorawetzWeight& w, const ProfileCoefficients& coeffs, double mu) {
    const double H = functional_H(eps, st.b, st.lambda, coeffs, mu);
    const double J = functional_J(eps, w);
    const double l4 = std::pow(st.lambda, 4);
    return (H + st.b * J) / l4;
}

// ---------------------------------------------------------------------------
// Empirical coercivity of H on the orthogonality complement.
// ---------------------------------------------------------------------------

struct CoercivitySample {
    double min_ratio = 0.0;  // min H / |eps|_{H1}^2 over the samples
    std::size_t n_samples = 0;
};

inline ComplexField random_decaying_field(const SpatialGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> center(-5.0, 5.0), width(0.6, 2.0), amp(-1.0, 1.0);
    ComplexField f(g);
    for (int k = 0; k < 6; ++k) {
        const double c = center(rng), w = width(rng);
        const complexd a{amp(rng), amp(rng)};
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double y = (g.x(i) - c) / w;
            f.v[i] += a * std::exp(-y * y);
        }
    }
    return f;
}

/// Project eps onto the complement of the given (real-pairing) directions.
inline ComplexField project_out(const ComplexField& eps, std::vector<ComplexField> dirs) {
    ComplexField out = eps;
    // Gram-Schmidt the direction set first.
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double c = inner(dirs[i], dirs[j]) / inner(dirs[j], dirs[j]);
            for (std::size_t n = 0; n < dirs[i].size(); ++n) dirs[i].v[n] -= c * dirs[j].v[n];
        }
    }
    for (const auto& d : dirs) {
        const double nn = inner(d, d);
        if (nn <= 1e-28) continue;
        const double c = inner(out, d) / nn;
        for (std::size_t n = 0; n < out.size(); ++n) out.v[n] -= c * d.v[n];
    }
    return out;
}

inline CoercivitySample coercivity_H_check(std::size_t n_samples, double amplitude, double b,
                                           double lambda, const ProfileCoefficients& coeffs,
                                           double mu, std::uint64_t seed = 20240817u) {
    std::mt19937_64 rng(seed);
    const ComplexField pb = coeffs.eval_Pb(b, lambda);
    std::vector<ComplexField> dirs;
    dirs.push_back(multiply_i(lambda_op(pb)));
    dirs.push_back(multiply_y2(pb));
    {
        ComplexField rho_b(coeffs.grid());
        const RealField& rho = coeffs.rho();
        for (std::size_t i = 0; i < rho_b.size(); ++i) {
            const double y = coeffs.grid().x(i);
            rho_b.v[i] = complexd{0.0, 1.0} * std::polar(rho.v[i], -0.25 * b * y * y);
        }
        dirs.push_back(std::move(rho_b));
    }
    dirs.push_back(pb);  // mirrors the smallness of <eps, P_b> in the bootstrap

    CoercivitySample out;
    out.n_samples = n_samples;
    double min_ratio = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < n_samples; ++k) {
        ComplexField eps = project_out(random_decaying_field(coeffs.grid(), rng), dirs);
        const FieldNorms n = norms(eps);
        if (n.h1 < 1e-12) continue;
        const double scale = amplitude / n.h1;
        for (auto& x : eps.v) x *= scale;
        const double H = functional_H(eps, b, lambda, coeffs, mu);
        const double ratio = H / (amplitude * amplitude);
        if (first || ratio < min_ratio) {
            min_ratio = ratio;
            first = false;
        }
    }
    out.min_ratio = min_ratio;
    return out;
}

}  // namespace dnls
