#pragma once

// The (lambda, b) modulation ODE system
//     lambda_s / lambda + b = 0,   b_s + b^2 - beta lambda = 0,
// its conserved quantity c0 = b^2/lambda^2 - 2 beta / lambda, the explicit
// solution lambda = 2/(beta s^2), b = 2/s, the time maps to t, the
// final-data solve F(lambda_1) = s_1, E(b_1, lambda_1) = C0, and phase
// portrait sampling.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dnls/linops.hpp"

namespace dnls {

struct LawParams {
    double beta = 0.0;
    double C0 = 0.0;       // 8 E0 / \int y^2 Q^2
    double lambda0 = 0.1;  // upper cap of the F integral

    void validate() const {
        if (!(lambda0 > 0.0)) throw std::invalid_argument("law params: lambda0 must be positive");
        if (!(2.0 * beta + C0 * lambda0 > 0.0))
            throw std::invalid_argument("law params: need 2 beta + C0 lambda0 > 0");
    }
};

struct FlowState {
    double s = 0.0;
    double lambda = 0.0;
    double b = 0.0;
    double t = 0.0;  // physical time, dt/ds = lambda^2, anchored by the caller
};

inline void vector_field(double lambda, double b, double beta, double& dlambda, double& db) {
    dlambda = -lambda * b;
    db = -b * b + beta * lambda;
}

inline double conserved_c0(double lambda, double b, double beta) {
    return b * b / (lambda * lambda) - 2.0 * beta / lambda;
}

// ---------------------------------------------------------------------------
// Explicit solution and time maps.
// ---------------------------------------------------------------------------

inline FlowState app_solution(double s, double beta) {
    if (!(s > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("app solution: need s > 0 and beta > 0");
    const double C_s = 4.0 / (3.0 * beta * beta);
    return FlowState{s, 2.0 / (beta * s * s), 2.0 / s, -C_s / (s * s * s)};
}

struct TimeMaps {
    double t_app = 0.0;  // -C_s s^{-3}
    double C_s = 0.0;    // 4 / (3 beta^2)
    double C_lambda = 0.0;
    double C_b = 0.0;
};

inline TimeMaps time_maps(double s, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("time maps: beta must be positive");
    TimeMaps tm;
    tm.C_s = 4.0 / (3.0 * beta * beta);
    tm.t_app = -tm.C_s / (s * s * s);
    tm.C_lambda = (2.0 / beta) * std::pow(tm.C_s, -2.0 / 3.0);
    tm.C_b = 2.0 * std::pow(tm.C_s, -1.0 / 3.0);
    return tm;
}

// ---------------------------------------------------------------------------
// RK4 integration with proportional steps ds = step_rel * s.
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<FlowState> states;
    bool truncated = false;  // lambda hit 0 before s_end
};

inline Trajectory integrate(const FlowState& start, double beta, double s_end,
                            double step_rel = 1e-3) {
    if (!(step_rel > 0.0)) throw std::invalid_argument("integrate: step must be positive");
    Trajectory out;
    out.states.push_back(start);
    double s = start.s, lam = start.lambda, b = start.b, t = start.t;
    const double dir = (s_end >= s) ? 1.0 : -1.0;
    // Augmented system: (lambda, b, t) with dt/ds = lambda^2, so the time
    // map shares the integrator's order.
    auto rhs = [beta](double l, double bb, double& dl, double& db, double& dt) {
        vector_field(l, bb, beta, dl, db);
        dt = l * l;
    };
    while (dir * (s_end - s) > 0.0) {
        double ds = dir * step_rel * s;
        if (dir * (s + ds - s_end) > 0.0) ds = s_end - s;
        double k1l, k1b, k1t, k2l, k2b, k2t, k3l, k3b, k3t, k4l, k4b, k4t;
        rhs(lam, b, k1l, k1b, k1t);
        rhs(lam + 0.5 * ds * k1l, b + 0.5 * ds * k1b, k2l, k2b, k2t);
        rhs(lam + 0.5 * ds * k2l, b + 0.5 * ds * k2b, k3l, k3b, k3t);
        rhs(lam + ds * k3l, b + ds * k3b, k4l, k4b, k4t);
        lam += ds / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
        b += ds / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        t += ds / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        s += ds;
        if (!(lam > 0.0)) {
            out.truncated = true;
            break;
        }
        out.states.push_back(FlowState{s, lam, b, t});
    }
    return out;
}

// ---------------------------------------------------------------------------
// F(lambda) = \int_lambda^lambda0 dtau / (tau^{3/2} sqrt(2 beta + C0 tau)).
// Substituting tau = sigma^2 removes the endpoint spike:
//   F = 2 \int_{sqrt(lambda)}^{sqrt(lambda0)} dsigma / (sigma^2 sqrt(2 beta + C0 sigma^2)).
// ---------------------------------------------------------------------------

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

inline double script_F(double lambda, const LawParams& p) {
    p.validate();
    if (!(lambda > 0.0 && lambda <= p.lambda0))
        throw std::invalid_argument("script_F: need 0 < lambda <= lambda0");
    const double a = std::sqrt(lambda), b = std::sqrt(p.lambda0);
    auto f = [&p](double sigma) {
        return 2.0 / (sigma * sigma * std::sqrt(2.0 * p.beta + p.C0 * sigma * sigma));
    };
    return detail::integrate_adaptive(f, a, b, 1e-13 * std::max(1.0, 1.0 / a));
}

struct FinalData {
    double lambda1 = 0.0;
    double b1 = 0.0;
    LawParams params;
};

/// Solve F(lambda_1) = s_1 by bisection (F is strictly decreasing), then
/// b_1 = sqrt(2 beta lambda_1 + C0 lambda_1^2) from the truncated energy
/// relation E(b_1, lambda_1) = C0.
inline FinalData final_data(double s1, double E0, double mu, double lambda0 = 0.1) {
    LawParams p;
    p.beta = beta_coefficient(mu);
    p.C0 = 8.0 * E0 / yq_l2sq();
    p.lambda0 = lambda0;
    p.validate();
    if (!(s1 > 0.0)) throw std::invalid_argument("final_data: s1 must be positive");
    if (script_F(0.5 * p.lambda0, p) > s1)
        throw std::invalid_argument("final_data: s1 too small for the asymptotic regime");

    double lo = 1e-14, hi = 0.5 * p.lambda0;
    while (script_F(lo, p) < s1) lo *= 0.25;  // ensure bracket: F(lo) >= s1 >= F(hi)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = script_F(mid, p);
        if (std::abs(fm - s1) <= 1e-10 * s1) {
            lo = hi = mid;
            break;
        }
        if (fm > s1) lo = mid; else hi = mid;
    }
    FinalData out;
    out.lambda1 = 0.5 * (lo + hi);
    const double disc = 2.0 * p.beta * out.lambda1 + p.C0 * out.lambda1 * out.lambda1;
    if (!(disc >= 0.0)) throw std::runtime_error("final_data: negative discriminant");
    out.b1 = std::sqrt(disc);
    out.params = p;
    return out;
}

// ---------------------------------------------------------------------------
// Phase portrait sampling.
// ---------------------------------------------------------------------------

struct PortraitRow {
    double lambda = 0.0, b = 0.0, dlambda = 0.0, db = 0.0;
    bool on_parabola = false;  // near the curve b^2 = beta lambda
};

inline std::vector<PortraitRow> phase_portrait(double beta, double lambda_min, double lambda_max,
                                               double b_min, double b_max, std::size_t n_lambda,
                                               std::size_t n_b) {
    if (n_lambda < 1 || n_b < 1) throw std::invalid_argument("phase_portrait: counts must be positive");
    std::vector<PortraitRow> rows;
    rows.reserve(n_lambda * n_b);
    for (std::size_t i = 0; i < n_lambda; ++i) {
        const double lam = (n_lambda == 1)
                               ? lambda_min
                               : lambda_min + (lambda_max - lambda_min) * double(i) / double(n_lambda - 1);
        for (std::size_t j = 0; j < n_b; ++j) {
            const double b = (n_b == 1) ? b_min : b_min + (b_max - b_min) * double(j) / double(n_b - 1);
            PortraitRow r;
            r.lambda = lam;
            r.b = b;
            vector_field(lam, b, beta, r.dlambda, r.db);
            const double band = 0.05 * (b * b + std::abs(beta) * std::abs(lam)) + 1e-12;
            r.on_parabola = std::abs(b * b - beta * lam) <= band;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace dnls
