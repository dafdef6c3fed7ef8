#pragma once

// Test-side oracles, kept independent of the library's grid/discretization
// path: closed-form ground-state expressions and an adaptive quadrature for
// integrals over the line.  Expected values in the test files are frozen
// from these.

#include <cmath>
#include <functional>

namespace oracle {

// Q(x) = 3^{1/4} sech^{1/2}(2x) and derivatives, via s = sech(2x), t = tanh(2x).
inline double q(double x) { return std::pow(3.0, 0.25) * std::sqrt(1.0 / std::cosh(2.0 * x)); }
inline double q_prime(double x) { return -q(x) * std::tanh(2.0 * x); }
inline double q_second(double x) {
    const double s = 1.0 / std::cosh(2.0 * x);
    return q(x) * (1.0 - 3.0 * s * s);
}

inline double lambda_q(double x) { return 0.5 * q(x) + x * q_prime(x); }

// Adaptive Simpson on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Integral over the whole line of a rapidly decaying integrand; unit panels
/// keep the adaptive rule from terminating on an unluckily sampled zero.
inline double integrate_line(const std::function<double(double)>& f, double cut = 30.0,
                             double tol = 1e-13) {
    double s = 0.0;
    for (double a = -cut; a < cut - 0.5; a += 1.0) s += integrate(f, a, a + 1.0, tol);
    return s;
}

}  // namespace oracle
