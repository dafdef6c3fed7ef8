#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dnls/blowup_law.hpp"
#include "oracles.hpp"

using namespace dnls;

namespace {

/// Closed-form antiderivative of the F integrand after tau = sigma^2:
/// F(lambda) = [-sqrt(2 beta + C0 s^2)/(beta s)] between sqrt(lambda0), sqrt(lambda).
double closed_F(double lam, const LawParams& p) {
    auto anti = [&](double s) { return -std::sqrt(2.0 * p.beta + p.C0 * s * s) / (p.beta * s); };
    return anti(std::sqrt(p.lambda0)) - anti(std::sqrt(lam));
}

}  // namespace

TEST_CASE("vector field and explicit solution") {
    double dl, db;
    vector_field(0.5, 0.2, 1.0, dl, db);
    CHECK(dl == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(db == doctest::Approx(-0.04 + 0.5).epsilon(1e-15));

    // derivative of the explicit solution at beta=1, s=10:
    // dlambda/ds = -4/s^3 = -0.004, db/ds = -2/s^2 = -0.02
    const FlowState ap = app_solution(10.0, 1.0);
    vector_field(ap.lambda, ap.b, 1.0, dl, db);
    CHECK(dl == doctest::Approx(-0.004).epsilon(1e-12));
    CHECK(db == doctest::Approx(-0.02).epsilon(1e-12));

    // b = 0, beta > 0: repelled from the axis.
    vector_field(0.3, 0.0, 2.0, dl, db);
    CHECK(dl == 0.0);
    CHECK(db == doctest::Approx(0.6).epsilon(1e-15));

    // beta = 0 reproduces the unperturbed law lambda = b = 1/s.
    auto traj = integrate(FlowState{1.0, 1.0, 1.0, 0.0}, 0.0, 50.0, 1e-3);
    const FlowState end = traj.states.back();
    CHECK(end.lambda == doctest::Approx(1.0 / end.s).epsilon(1e-8));
    CHECK(end.b == doctest::Approx(1.0 / end.s).epsilon(1e-8));
}

TEST_CASE("integration against the explicit solution") {
    const double beta = 1.0;
    auto traj = integrate(app_solution(10.0, beta), beta, 1000.0, 1e-3);
    REQUIRE(!traj.truncated);
    const FlowState end = traj.states.back();
    const FlowState ex = app_solution(1000.0, beta);
    CHECK(end.lambda / ex.lambda == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(end.b / ex.b == doctest::Approx(1.0).epsilon(1e-8));

    // c0 = b^2/lambda^2 - 2 beta/lambda stays put (0 for the app solution).
    double worst = 0.0;
    for (const auto& st : traj.states) {
        const double per = std::max(1.0, st.s - 10.0);
        worst = std::max(worst,
                         std::abs(conserved_c0(st.lambda, st.b, beta)) /
                             (2.0 * beta / st.lambda) / per);
    }
    CHECK(worst <= 1e-10);

    // 4th order: quartering the step cuts the endpoint error ~256x (allow slack).
    auto coarse = integrate(app_solution(10.0, beta), beta, 100.0, 8e-3);
    auto fine = integrate(app_solution(10.0, beta), beta, 100.0, 2e-3);
    const double ec = std::abs(coarse.states.back().lambda / app_solution(100.0, beta).lambda - 1.0);
    const double ef = std::abs(fine.states.back().lambda / app_solution(100.0, beta).lambda - 1.0);
    CHECK(ec / ef > 100.0);

    // beta = -1: b crosses zero and lambda stops decreasing (no blow-up).
    auto rep = integrate(FlowState{1.0, 0.01, 0.1, 0.0}, -1.0, 400.0, 1e-3);
    REQUIRE(!rep.truncated);
    double lam_min = 1e300;
    bool b_crossed = false;
    for (const auto& st : rep.states) {
        lam_min = std::min(lam_min, st.lambda);
        if (st.b < 0.0) b_crossed = true;
    }
    CHECK(b_crossed);
    CHECK(rep.states.back().lambda > lam_min * 1.0001);
    CHECK(rep.states.back().b < 0.0);
}

TEST_CASE("time maps") {
    const TimeMaps tm1 = time_maps(10.0, 1.0);
    CHECK(tm1.C_s == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(tm1.t_app == doctest::Approx(-4.0 / 3000.0).epsilon(1e-12));

    // internal consistency lambda_app(s) = C_lambda |t_app(s)|^{2/3} to 1e-12
    for (double beta : {0.7, 1.0, 2.0641}) {
        for (double s : {5.0, 50.0, 500.0}) {
            const TimeMaps tm = time_maps(s, beta);
            const FlowState ap = app_solution(s, beta);
            CHECK(ap.lambda ==
                  doctest::Approx(tm.C_lambda * std::pow(-tm.t_app, 2.0 / 3.0)).epsilon(1e-12));
            CHECK(ap.b == doctest::Approx(tm.C_b * std::pow(-tm.t_app, 1.0 / 3.0)).epsilon(1e-12));
            // b/lambda^2 = (2/3)/|t| trend
            CHECK(ap.b / (ap.lambda * ap.lambda) ==
                  doctest::Approx((2.0 / 3.0) / -tm.t_app).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(time_maps(10.0, -1.0), std::invalid_argument);
}

TEST_CASE("lambda(t) exponent along integrated trajectories") {
    const double beta = 2.0;
    auto traj = integrate(app_solution(10.0, beta), beta, 1000.0, 1e-3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& st : traj.states) {
        const double lx = std::log(-st.t), ly = std::log(st.lambda);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("script_F") {
    LawParams p;
    p.beta = 2.0641;
    p.C0 = 3.0;
    p.lambda0 = 0.1;

    CHECK(script_F(p.lambda0, p) == 0.0);

    // strictly decreasing
    double prev = script_F(0.09, p);
    for (double lam : {0.05, 0.01, 1e-3, 1e-4}) {
        const double v = script_F(lam, p);
        CHECK(v > prev);
        prev = v;
    }

    // quadrature vs the closed form (independent algebraic route)
    for (double c0 : {-4.0, 0.0, 4.0}) {
        LawParams q{2.0641, c0, 0.1};
        for (double lam : {0.05, 1e-3, 1e-5})
            CHECK(script_F(lam, q) == doctest::Approx(closed_F(lam, q)).epsilon(1e-11));
    }

    // |F(lambda) - 2/sqrt(2 beta lambda)| stays bounded as lambda -> 0
    double worst = 0.0;
    for (double lam : {1e-3, 1e-4, 1e-5})
        worst = std::max(worst,
                         std::abs(script_F(lam, p) - 2.0 / std::sqrt(2.0 * p.beta * lam)));
    CHECK(worst < 10.0);

    CHECK_THROWS_AS(script_F(0.2, p), std::invalid_argument);        // above lambda0
    LawParams bad{1.0, -30.0, 0.1};
    CHECK_THROWS_AS(script_F(0.05, bad), std::invalid_argument);     // 2b + C0 l0 < 0
}

TEST_CASE("final data solve") {
    for (double E0 : {-1.0, 0.0, 1.0}) {
        for (double s1 : {50.0, 100.0, 200.0}) {
            const FinalData fd = final_data(s1, E0, 1.0);
            CHECK(fd.b1 > 0.0);
            CHECK(std::abs(script_F(fd.lambda1, fd.params) - s1) <= 1e-8 * s1);
            // energy relation residual (direct substitution oracle)
            CHECK(fd.b1 * fd.b1 ==
                  doctest::Approx(2.0 * fd.params.beta * fd.lambda1 +
                                  fd.params.C0 * fd.lambda1 * fd.lambda1)
                      .epsilon(1e-12));
            // closeness to the app law: |b1/b_app - 1| <= 10/s1
            CHECK(std::abs(fd.b1 / (2.0 / s1) - 1.0) <= 10.0 / s1);
            const double lam_app = app_solution(s1, fd.params.beta).lambda;
            CHECK(std::abs(std::sqrt(fd.lambda1 / lam_app) - 1.0) <= 10.0 / s1);
        }
    }
    CHECK_THROWS_AS(final_data(0.5, 0.0, 1.0), std::invalid_argument);  // s1 too small
}

TEST_CASE("phase portrait") {
    // on-parabola flag at b^2 = beta lambda
    auto rows = phase_portrait(1.0, 0.01, 0.01, 0.1, 0.1, 1, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].on_parabola);
    CHECK(rows[0].dlambda == doctest::Approx(-0.001).epsilon(1e-15));

    // beta = 0: db/ds = -b^2 <= 0 everywhere
    for (const auto& r : phase_portrait(0.0, 0.001, 0.02, -0.2, 0.2, 5, 9)) CHECK(r.db <= 0.0);

    // db/ds is even in b (mirrored samples)
    auto grid_rows = phase_portrait(1.3, 0.01, 0.05, -0.3, 0.3, 4, 7);
    for (const auto& r : grid_rows) {
        double dl, db;
        vector_field(r.lambda, -r.b, 1.3, dl, db);
        CHECK(db == doctest::Approx(r.db).epsilon(1e-14));
    }

    CHECK_THROWS_AS(phase_portrait(1.0, 0.0, 1.0, 0.0, 1.0, 0, 3), std::invalid_argument);
}
