#pragma once

// Time evolution of i u_t + u_xx + mu delta u + |u|^4 u = 0.
// Strang composition: a half step of the exact pointwise nonlinear phase
// around a full Crank-Nicolson step of the linear part (tridiagonal plus
// the single-node delta, solved by a complex Thomas sweep).  The CN step is
// a Cayley transform of a symmetric matrix, so the discrete mass is
// conserved to roundoff; the phase factor is modulus-preserving.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dnls/blowup_law.hpp"
#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/profile.hpp"

namespace dnls {

enum class TimeDirection { forward, backward };

struct EvolutionConfig {
    double mu = 0.0;
    double dt0 = 1e-4;
    bool adapt = false;  // dt = dt0 * min(1, lambda_est^2)
    double t_start = 0.0;
    double t_end = 1.0;
    TimeDirection direction = TimeDirection::forward;
    double blowup_grad_factor = 50.0;   // stop when grad exceeds this multiple of initial
    double lambda_floor_cells = 20.0;   // stop when lambda_est < cells * h
    double lambda_ceiling = 0.0;        // 0 disables; stop when lambda_est exceeds it
    std::size_t record_stride = 1;      // keep every n-th sample in the record
    std::size_t snapshot_count = 0;     // 0 disables field snapshots
    std::size_t max_steps = 50'000'000;

    void validate() const {
        if (!(dt0 > 0.0)) throw std::invalid_argument("evolution: dt0 must be positive");
        if (t_end == t_start) throw std::invalid_argument("evolution: empty time interval");
        if ((direction == TimeDirection::forward) != (t_end > t_start))
            throw std::invalid_argument("evolution: direction inconsistent with time interval");
    }
};

struct RecordRow {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double grad_l2 = 0.0;
    double abs_u0 = 0.0;
    double dt_used = 0.0;
};

struct Snapshot {
    double t = 0.0;
    ComplexField u;
};

struct EvolutionRecord {
    std::vector<RecordRow> rows;
    std::vector<Snapshot> snapshots;
    bool blowup_flag = false;
    bool resolution_stop = false;
    double shrink_factor = 1.0;  // initial lambda_est / smallest lambda_est reached
};

struct EvolutionResult {
    ComplexField u_final;
    EvolutionRecord record;
};

namespace detail {

/// |dQ/dy|_2 of the free ground state: sqrt(sqrt(3) pi / 4).
inline double q_grad_l2() { return std::sqrt(std::sqrt(3.0) * std::numbers::pi / 4.0); }

/// Thomas solve, complex, constant off-diagonal.
inline void solve_tridiag_const_off(const std::vector<complexd>& diag, complexd off,
                                    std::vector<complexd>& rhs, std::vector<complexd>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    complexd denom = diag[0];
    scratch[0] = off / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace detail

/// Reusable workspace for repeated steps on one grid.
class Stepper {
public:
    Stepper(const SpatialGrid& g, double mu) : grid_(g), mu_(mu) {
        const double inv_h2 = 1.0 / (g.spacing * g.spacing);
        h_diag_.assign(g.node_count, 2.0 * inv_h2);
        h_diag_[g.origin_index()] -= mu / g.spacing;
        h_off_ = -inv_h2;
    }

    /// One Strang step; dt may be negative (time reversal by direct stepping
    /// is supported, though evolve() uses conjugation instead).
    void step(ComplexField& u, double dt) const {
        require_same_grid(grid_, u.grid);
        nonlinear_half(u, dt);
        // (I + i dt/2 H) u' = (I - i dt/2 H) u,  H = -D^2 - mu delta/h
        const complexd half{0.0, 0.5 * dt};
        const std::size_t n = u.size();
        diag_p_.resize(n);
        rhs_.resize(n);
        for (std::size_t i = 0; i < n; ++i) diag_p_[i] = 1.0 + half * h_diag_[i];
        const complexd off_m = -half * h_off_;
        for (std::size_t i = 0; i < n; ++i) {
            const complexd left = (i == 0) ? complexd{} : u.v[i - 1];
            const complexd right = (i + 1 == n) ? complexd{} : u.v[i + 1];
            rhs_[i] = (1.0 - half * h_diag_[i]) * u.v[i] + off_m * (left + right);
        }
        detail::solve_tridiag_const_off(diag_p_, half * h_off_, rhs_, scratch_);
        u.v = rhs_;
        nonlinear_half(u, dt);
    }

private:
    static void nonlinear_half(ComplexField& u, double dt) {
        const double c = 0.5 * dt;
        for (auto& x : u.v) {
            const double a2 = std::norm(x);
            x *= std::polar(1.0, c * a2 * a2);
        }
    }

    SpatialGrid grid_;
    double mu_;
    std::vector<double> h_diag_;
    double h_off_ = 0.0;
    mutable std::vector<complexd> diag_p_, rhs_, scratch_;
};

inline ComplexField step(const ComplexField& u, double dt, double mu) {
    if (dt == 0.0) throw std::invalid_argument("step: dt must be nonzero");
    Stepper st(u.grid, mu);
    ComplexField out = u;
    st.step(out, dt);
    return out;
}

/// Driver.  Backward runs use the conjugation symmetry u(t,x) -> conj(u)(-t,x)
/// so the stepper itself only ever marches forward.
inline EvolutionResult evolve(const ComplexField& u0, const EvolutionConfig& cfg) {
    cfg.validate();
    const bool backward = cfg.direction == TimeDirection::backward;
    const double span = std::abs(cfg.t_end - cfg.t_start);

    ComplexField u = backward ? conj_field(u0) : u0;
    Stepper st(u.grid, cfg.mu);

    EvolutionResult res;
    auto push_row = [&](double tau, double dt_used, const FieldNorms& n, double en, double au0) {
        RecordRow row;
        row.t = backward ? cfg.t_start - tau : cfg.t_start + tau;
        row.mass = 0.5 * n.l2 * n.l2;
        row.energy = en;
        row.grad_l2 = n.grad_l2;
        row.abs_u0 = au0;
        row.dt_used = dt_used;
        res.record.rows.push_back(row);
    };
    auto observe = [&](const ComplexField& w, double tau, double dt_used) {
        // The conjugate state has the same modulus, gradient and energy.
        const FieldNorms n = norms(w);
        push_row(tau, dt_used, n, energy(w, cfg.mu), std::abs(w.at_origin()));
        return n;
    };

    // Allocation-free centered-difference gradient norm, evaluated every step.
    auto grad_norm = [](const ComplexField& w) {
        const SpatialGrid& g = w.grid;
        const double inv_2h = 0.5 / g.spacing;
        const std::size_t n = w.size();
        double g2 = g.weight(0) * std::norm((w.v[1] - w.v[0]) * (2.0 * inv_2h));
        g2 += g.weight(n - 1) * std::norm((w.v[n - 1] - w.v[n - 2]) * (2.0 * inv_2h));
        for (std::size_t i = 1; i + 1 < n; ++i)
            g2 += g.weight(i) * std::norm((w.v[i + 1] - w.v[i - 1]) * inv_2h);
        return std::sqrt(g2);
    };

    FieldNorms n0 = observe(u, 0.0, 0.0);
    const double grad0 = std::max(n0.grad_l2, 1e-300);
    double lambda_min_seen = detail::q_grad_l2() / grad0;
    const double lambda_init = lambda_min_seen;

    const double snap_interval =
        cfg.snapshot_count > 1 ? span / double(cfg.snapshot_count - 1) : span + 1.0;
    auto maybe_snapshot = [&](const ComplexField& w, double tau) {
        if (cfg.snapshot_count == 0) return;
        const std::size_t due = res.record.snapshots.size();
        if (due < cfg.snapshot_count && tau + 1e-15 * span >= double(due) * snap_interval) {
            Snapshot s;
            s.t = backward ? cfg.t_start - tau : cfg.t_start + tau;
            s.u = backward ? conj_field(w) : w;
            res.record.snapshots.push_back(std::move(s));
        }
    };
    maybe_snapshot(u, 0.0);

    double tau = 0.0;
    std::size_t steps = 0;
    double grad_cur = n0.grad_l2;
    while (tau < span && steps < cfg.max_steps) {
        double lambda_est = detail::q_grad_l2() / std::max(grad_cur, 1e-300);
        double dt = cfg.adapt ? cfg.dt0 * std::min(1.0, lambda_est * lambda_est) : cfg.dt0;
        if (tau + dt > span) dt = span - tau;
        st.step(u, dt);
        tau += dt;
        ++steps;

        const bool record_now = (steps % cfg.record_stride == 0) || tau >= span;
        if (record_now) {
            grad_cur = observe(u, tau, dt).grad_l2;
        } else {
            grad_cur = grad_norm(u);
        }
        lambda_est = detail::q_grad_l2() / std::max(grad_cur, 1e-300);
        lambda_min_seen = std::min(lambda_min_seen, lambda_est);
        maybe_snapshot(u, tau);

        if (grad_cur > cfg.blowup_grad_factor * grad0) {
            res.record.blowup_flag = true;
            break;
        }
        if (lambda_est < cfg.lambda_floor_cells * u.grid.spacing) {
            res.record.blowup_flag = true;
            res.record.resolution_stop = true;
            break;
        }
        if (cfg.lambda_ceiling > 0.0 && lambda_est > cfg.lambda_ceiling) {
            res.record.resolution_stop = true;
            break;
        }
    }

    res.record.shrink_factor = lambda_init / std::max(lambda_min_seen, 1e-300);
    res.u_final = backward ? conj_field(u) : u;
    return res;
}

// ---------------------------------------------------------------------------
// Blow-up final data on the physical grid:
//   u(t1, x) = lambda1^{-1/2} P_{b1}(x / lambda1).
// ---------------------------------------------------------------------------

inline ComplexField final_data_field(const FinalData& fd, const ProfileCoefficients& coeffs,
                                     const SpatialGrid& physical) {
    if (!(fd.lambda1 >= 50.0 * physical.spacing))
        throw resolution_floor_error("final_data_field: lambda1 below 50 h on the physical grid");
    return sample_rescaled_profile(coeffs, fd.b1, fd.lambda1, 0.0, physical);
}

inline ComplexField final_data_field(double s1, double E0, double mu,
                                     const ProfileCoefficients& coeffs,
                                     const SpatialGrid& physical) {
    return final_data_field(final_data(s1, E0, mu), coeffs, physical);
}

}  // namespace dnls
