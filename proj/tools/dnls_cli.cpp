// Command line front end: every experiment in the laboratory is reachable
// from here, and every run leaves a manifest JSON next to its outputs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnls/dnls.hpp"

using namespace dnls;
using nlohmann::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

json check_entry(const std::string& id, double value, double target, double tol, bool pass) {
    return json{{"criterion_id", id}, {"value", value}, {"target", target},
                {"tolerance", tol}, {"pass", pass}};
}

SpatialGrid grid_from(double L, std::size_t N) { return SpatialGrid(L, N); }

// ---------------------------------------------------------------------------
// profile coefficients <-> files
// ---------------------------------------------------------------------------

json write_profile_outputs(const ProfileCoefficients& coeffs, const std::string& prefix,
                           std::vector<std::string>& outputs) {
    json blocks = json::array();
    for (int k = 0; k <= coeffs.K(); ++k)
        for (int j = 0; j + k <= coeffs.K(); ++j) {
            const ProfileBlock& blk = coeffs.block(j, k);
            const std::string pp = prefix + "_p_plus_" + std::to_string(j) + "_" + std::to_string(k) + ".csv";
            const std::string pm = prefix + "_p_minus_" + std::to_string(j) + "_" + std::to_string(k) + ".csv";
            write_field_csv(pp, blk.p_plus);
            write_field_csv(pm, blk.p_minus);
            outputs.push_back(pp);
            outputs.push_back(pm);
            blocks.push_back(json{{"j", j},
                                  {"k", k},
                                  {"beta", blk.beta},
                                  {"residual_plus", blk.resid_plus},
                                  {"residual_minus", blk.resid_minus},
                                  {"p_plus_csv", pp},
                                  {"p_minus_csv", pm}});
        }
    return json{{"K", coeffs.K()},
                {"mu", coeffs.mu()},
                {"grid", grid_json(coeffs.grid())},
                {"blocks", blocks}};
}

ProfileCoefficients load_profile(const std::string& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw std::invalid_argument("cannot open profile manifest: " + manifest_path);
    json j;
    is >> j;
    const SpatialGrid g(j["grid"]["half_width"].get<double>(),
                        j["grid"]["node_count"].get<std::size_t>());
    ProfileCoefficients coeffs(g, j["K"].get<int>(), j["mu"].get<double>());
    for (const auto& blk : j["blocks"]) {
        ProfileBlock& b = coeffs.block(blk["j"].get<int>(), blk["k"].get<int>());
        b.beta = blk["beta"].get<double>();
        b.p_plus = real_part(read_field_csv(blk["p_plus_csv"].get<std::string>()));
        b.p_minus = real_part(read_field_csv(blk["p_minus_csv"].get<std::string>()));
    }
    return coeffs;
}

// ---------------------------------------------------------------------------
// simulate config
// ---------------------------------------------------------------------------

struct SimulateSpec {
    SpatialGrid grid;
    EvolutionConfig cfg;
    ComplexField u0;
    std::string out_prefix = "run";
};

SimulateSpec parse_simulate_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config: " + path);
    json j;
    is >> j;

    SimulateSpec spec;
    spec.grid = grid_from(j["grid"]["half_width"].get<double>(),
                          j["grid"]["node_count"].get<std::size_t>());
    EvolutionConfig& c = spec.cfg;
    c.mu = j.value("mu", 0.0);
    c.dt0 = j.value("dt0", 1e-4);
    c.adapt = j.value("adapt", false);
    c.t_start = j.value("t_start", 0.0);
    c.t_end = j.value("t_end", 1.0);
    c.direction = (j.value("direction", std::string("forward")) == std::string("backward"))
                      ? TimeDirection::backward
                      : TimeDirection::forward;
    c.blowup_grad_factor = j.value("blowup_grad_factor", 50.0);
    c.lambda_floor_cells = j.value("lambda_floor_cells", 20.0);
    c.lambda_ceiling = j.value("lambda_ceiling", 0.0);
    c.record_stride = j.value("record_stride", std::size_t{1});
    c.snapshot_count = j.value("snapshot_count", std::size_t{0});
    spec.out_prefix = j.value("out_prefix", std::string("run"));

    const json& init = j.at("initial");
    const std::string type = init.at("type").get<std::string>();
    if (type == "ground_state") {
        GroundStateSpec gs{init.value("omega", 1.0), init.value("mu", 0.0)};
        ComplexField u(ground_state(gs, spec.grid));
        const double scale = init.value("scale", 1.0);
        for (auto& x : u.v) x *= scale;
        spec.u0 = std::move(u);
    } else if (type == "pseudoconformal") {
        spec.u0 = pseudoconformal_solution(init.at("t").get<double>(), spec.grid);
    } else if (type == "final_data") {
        const SpatialGrid yg = init.contains("ygrid")
                                   ? grid_from(init["ygrid"]["half_width"].get<double>(),
                                               init["ygrid"]["node_count"].get<std::size_t>())
                                   : SpatialGrid{};
        auto coeffs = build_profile(init.value("K", 2), c.mu, yg);
        spec.u0 = final_data_field(init.at("s1").get<double>(), init.value("E0", 0.0), c.mu,
                                   coeffs, spec.grid);
    } else if (type == "file") {
        spec.u0 = read_field_csv(init.at("path").get<std::string>());
        if (!spec.u0.grid.same(spec.grid))
            throw std::invalid_argument("initial data file grid does not match config grid");
    } else {
        throw std::invalid_argument("unknown initial data selector: " + type);
    }
    return spec;
}

CsvTable record_table(const EvolutionRecord& rec) {
    CsvTable t;
    t.columns = {"t", "mass", "energy", "grad_l2", "abs_u0", "dt"};
    for (const auto& r : rec.rows)
        t.rows.push_back({r.t, r.mass, r.energy, r.grad_l2, r.abs_u0, r.dt_used});
    return t;
}

struct ModRow {
    double t, s, lambda, b, gamma, eps_l2, eps_h1, mod1, mod2, mod3, H, J, S, eps_pb;
};

CsvTable mod_table(const std::vector<ModRow>& rows) {
    CsvTable t;
    t.columns = {"t", "s", "lambda", "b", "gamma", "eps_l2", "eps_h1",
                 "mod1", "mod2", "mod3", "H", "J", "S", "eps_Pb_pairing"};
    for (const auto& r : rows)
        t.rows.push_back({r.t, r.s, r.lambda, r.b, r.gamma, r.eps_l2, r.eps_h1, r.mod1, r.mod2,
                          r.mod3, r.H, r.J, r.S, r.eps_pb});
    return t;
}

/// Decompose a snapshot sequence and assemble the mod.csv rows.
std::vector<ModRow> track_snapshots(const std::vector<Snapshot>& snaps,
                                    const ProfileCoefficients& coeffs, double s_first,
                                    ModulationState guess, double morawetz_A) {
    std::vector<Decomposition> decs;
    double gamma_prev = guess.gamma;
    double s_prev = s_first;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        double s_here = s_prev;
        if (i > 0) {
            const double lam = decs.back().state.lambda;
            s_here = s_prev + (snaps[i].t - snaps[i - 1].t) / (lam * lam);
            guess.lambda = decs.back().state.lambda;
            guess.b = decs.back().state.b;
            guess.gamma = gamma_prev + (s_here - s_prev);
        }
        Decomposition d = decompose(snaps[i].u, guess, coeffs);
        d.state.t = snaps[i].t;
        gamma_prev = d.state.gamma;
        s_prev = s_here;
        decs.push_back(std::move(d));
    }

    const auto mods = mod_vector(decs, coeffs, s_first);
    const MorawetzWeight w(morawetz_A);
    std::vector<ModRow> rows(decs.size());
    for (std::size_t i = 0; i < decs.size(); ++i) {
        const Decomposition& d = decs[i];
        const FieldNorms n = norms(d.epsilon);
        ModRow& r = rows[i];
        r.t = d.state.t;
        r.s = mods[i].s;
        r.lambda = d.state.lambda;
        r.b = d.state.b;
        r.gamma = d.state.gamma;
        r.eps_l2 = n.l2;
        r.eps_h1 = n.h1;
        r.mod1 = mods[i].mod1;
        r.mod2 = mods[i].mod2;
        r.mod3 = mods[i].mod3;
        r.H = functional_H(d.epsilon, d.state.b, d.state.lambda, coeffs, coeffs.mu());
        r.J = functional_J(d.epsilon, w);
        ModulationState st = d.state;
        st.s = mods[i].s;
        r.S = functional_S(d.epsilon, st, w, coeffs, coeffs.mu());
        r.eps_pb = d.eps_pb_pairing;
    }
    return rows;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = int(x.size());
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int run_cli(int argc, char** argv);

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const resolution_floor_error& e) {
        std::cerr << "error: category=resolution-floor message=" << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: category=config message=" << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: category=precondition message=" << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: category=numerical message=" << e.what() << "\n";
        return 4;
    }
}

namespace {

int run_cli(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the quintic NLS with a delta potential"};
    app.require_subcommand(1);

    double L = 20.0;
    std::size_t N = 4001;
    app.add_option("--grid-L", L, "half width of the grid");
    app.add_option("--grid-N", N, "node count (odd)");

    auto* gs_cmd = app.add_subcommand("ground-state", "explicit solitary wave and functionals");
    double gs_omega = 1.0, gs_mu = 0.0;
    std::string gs_out = "ground_state";
    gs_cmd->add_option("--omega", gs_omega);
    gs_cmd->add_option("--mu", gs_mu);
    gs_cmd->add_option("--out", gs_out, "output prefix");

    auto* lv_cmd = app.add_subcommand("linops-verify", "algebra residuals and coercivity gaps");
    std::string lv_out = "linops";
    lv_cmd->add_option("--out", lv_out);

    auto* pb_cmd = app.add_subcommand("profile-build", "solve the corrector recursion");
    int pb_K = 2;
    double pb_mu = 1.0;
    std::string pb_out = "profile";
    pb_cmd->add_option("--K", pb_K);
    pb_cmd->add_option("--mu", pb_mu);
    pb_cmd->add_option("--out", pb_out);

    auto* rs_cmd = app.add_subcommand("residual-scan", "profile residual along the app curve");
    int rs_K = 2;
    double rs_mu = 1.0;
    std::vector<double> rs_s = {20.0, 40.0, 80.0, 160.0};
    std::string rs_out = "residual_scan.csv";
    rs_cmd->add_option("--K", rs_K);
    rs_cmd->add_option("--mu", rs_mu);
    rs_cmd->add_option("--s", rs_s, "rescaled times to sample");
    rs_cmd->add_option("--out", rs_out);

    auto* pp_cmd = app.add_subcommand("phase-portrait", "vector field samples of the (lambda,b) law");
    double pp_beta = 1.0, pp_lmin = 1e-3, pp_lmax = 0.05, pp_bmin = -0.3, pp_bmax = 0.3;
    std::size_t pp_nl = 25, pp_nb = 25;
    std::string pp_out = "portrait.csv";
    pp_cmd->add_option("--beta", pp_beta);
    pp_cmd->add_option("--lambda-min", pp_lmin);
    pp_cmd->add_option("--lambda-max", pp_lmax);
    pp_cmd->add_option("--b-min", pp_bmin);
    pp_cmd->add_option("--b-max", pp_bmax);
    pp_cmd->add_option("--n-lambda", pp_nl);
    pp_cmd->add_option("--n-b", pp_nb);
    pp_cmd->add_option("--out", pp_out);

    auto* li_cmd = app.add_subcommand("law-integrate", "integrate the modulation ODE system");
    double li_beta = 1.0, li_s0 = 10.0, li_s1 = 1000.0, li_step = 1e-3;
    std::string li_out = "traj.csv";
    li_cmd->add_option("--beta", li_beta);
    li_cmd->add_option("--s0", li_s0);
    li_cmd->add_option("--s1", li_s1);
    li_cmd->add_option("--step", li_step, "proportional step factor");
    li_cmd->add_option("--out", li_out);

    auto* sim_cmd = app.add_subcommand("simulate", "evolve the PDE from a JSON config");
    std::string sim_config;
    std::string sim_out_override;
    double sim_dt_override = 0.0;
    sim_cmd->add_option("--config", sim_config)->required();
    sim_cmd->add_option("--out", sim_out_override, "override output prefix");
    sim_cmd->add_option("--dt0", sim_dt_override, "override base step");

    auto* mt_cmd = app.add_subcommand("modulation-track", "decompose stored snapshots");
    std::string mt_in, mt_coeffs, mt_out = "mod.csv";
    double mt_s1 = 0.0, mt_lambda = 0.0, mt_b = 0.0, mt_gamma = 0.0, mt_A = 20.0;
    mt_cmd->add_option("--in", mt_in, "snapshot index csv from simulate")->required();
    mt_cmd->add_option("--coeffs", mt_coeffs, "profile manifest json")->required();
    mt_cmd->add_option("--out", mt_out);
    mt_cmd->add_option("--s1", mt_s1, "rescaled time of the first snapshot")->required();
    mt_cmd->add_option("--guess-lambda", mt_lambda)->required();
    mt_cmd->add_option("--guess-b", mt_b);
    mt_cmd->add_option("--guess-gamma", mt_gamma);
    mt_cmd->add_option("--morawetz-A", mt_A);

    auto* bx_cmd = app.add_subcommand("blowup-experiment",
                                      "final data, backward evolution, modulation fit");
    double bx_mu = 1.0, bx_E0 = 0.0, bx_s1 = 100.0, bx_s0 = 75.0, bx_ds = 0.0025;
    int bx_K = 2;
    std::size_t bx_snaps = 21;
    std::string bx_out = "blowup";
    bx_cmd->add_option("--mu", bx_mu);
    bx_cmd->add_option("--E0", bx_E0);
    bx_cmd->add_option("--s1", bx_s1);
    bx_cmd->add_option("--s0", bx_s0);
    bx_cmd->add_option("--K", bx_K);
    bx_cmd->add_option("--ds", bx_ds, "rescaled-time step of the solver");
    bx_cmd->add_option("--snapshots", bx_snaps);
    bx_cmd->add_option("--out", bx_out);

    auto* rp_cmd = app.add_subcommand("report", "collate manifests into a summary");
    std::string rp_dir = ".", rp_out = "report.json";
    rp_cmd->add_option("--dir", rp_dir);
    rp_cmd->add_option("--out", rp_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;  // --help
        std::cerr << "error: category=usage message=argument parsing failed\n";
        return 2;
    }
    Timer timer;

    if (*gs_cmd) {
        const SpatialGrid g = grid_from(L, N);
        const RealField q = ground_state(GroundStateSpec{gs_omega, gs_mu}, g);
        const std::string field_csv = gs_out + ".csv";
        write_field_csv(field_csv, q);
        const GNCheck gn = gn_check(q);
        json summary{{"mass", mass(q).mass},
                     {"l2sq", mass(q).l2sq},
                     {"energy", energy(q, gs_mu)},
                     {"omega", gs_omega},
                     {"gn_ratio", gn.ratio}};
        const std::string sj = gs_out + ".json";
        std::ofstream(sj) << summary.dump(2) << '\n';

        RunManifest m;
        m.subcommand = "ground-state";
        m.parameters = {{"omega", gs_omega}, {"mu", gs_mu}};
        m.grid = grid_json(g);
        m.outputs = {field_csv, sj};
        m.wall_time_s = timer.seconds();
        m.write(gs_out + "_manifest.json");
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (*lv_cmd) {
        const SpatialGrid g = grid_from(L, N);
        const RealField q = free_ground_state(g);
        const RealField y2q = multiply_y2(q);
        const RealField rho = rho_field(g);
        auto lp = make_linearized(LinKind::plus, g);
        auto lm = make_linearized(LinKind::minus, g);

        RealField lam_q(g);
        for (std::size_t i = 0; i < g.node_count; ++i) {
            const double x = g.x(i);
            const double s = 1.0 / std::cosh(2.0 * x);
            lam_q.v[i] = 0.5 * q.v[i] - x * std::pow(3.0, 0.25) * std::sqrt(s) * std::tanh(2.0 * x);
        }

        // apply-direction residuals (O(h^2) with the stencil constants)
        json apply_res{{"Lm_Q", l2_norm(apply(lm, q))},
                       {"Lp_LambdaQ_plus_2Q", l2_norm(added(apply(lp, lam_q), q, 2.0))},
                       {"Lm_y2Q_plus_4LambdaQ", l2_norm(added(apply(lm, y2q), lam_q, 4.0))},
                       {"Lp_rho_minus_y2Q", l2_norm(added(apply(lp, rho), y2q, -1.0))}};

        // solver-identification residuals of the same four relations
        RealField ker = EvenSectorOperator(LinKind::minus, g).kernel();
        if (inner(ker, q) < 0.0)
            for (auto& x : ker.v) x = -x;
        RealField qhat = q;
        {
            const double n = l2_norm(qhat);
            for (auto& x : qhat.v) x /= n;
        }
        const double id1 = l2_norm(added(ker, qhat, -1.0));
        const double id2 = l2_norm(added(solve_plus(scaled(q, -2.0), g), lam_q, -1.0));
        RealField f3 = solve_minus(scaled(lam_q, -4.0), g, SolveMinusOptions{1e-3});
        RealField tgt = added(y2q, q, -inner(y2q, q) / inner(q, q));
        RealField d3 = added(f3, tgt, -1.0);
        d3 = added(d3, q, -inner(d3, q) / inner(q, q));
        const double id3 = l2_norm(d3);
        const double qr_ratio = inner(q, rho) / (0.5 * inner(y2q, q));
        const double id4 = std::abs(qr_ratio - 1.0);
        json ident_res{{"kernel_vs_Q", id1},
                       {"solve_plus_minus2Q_vs_LambdaQ", id2},
                       {"solve_minus_minus4LambdaQ_vs_y2Q", id3},
                       {"Q_rho_pairing_defect", id4}};

        const double gap_plus = coercivity_gap(LinKind::plus, {q, y2q}, g);
        const double gap_minus = coercivity_gap(LinKind::minus, {rho}, g);
        const double gap_minus_free = coercivity_gap(LinKind::minus, {}, g);

        json out{{"grid", grid_json(g)},
                 {"apply_residuals", apply_res},
                 {"identification_residuals", ident_res},
                 {"Q_rho_over_half_yQ2", qr_ratio},
                 {"beta_closed_form_mu1", beta_coefficient(1.0)},
                 {"beta_solvability_mu1", beta_solvability(1.0, g)},
                 {"gap_plus_constrained", gap_plus},
                 {"gap_minus_constrained", gap_minus},
                 {"gap_minus_unconstrained", gap_minus_free}};
        const std::string oj = lv_out + ".json";
        std::ofstream(oj) << out.dump(2) << '\n';

        RunManifest m;
        m.subcommand = "linops-verify";
        m.parameters = json::object();
        m.grid = grid_json(g);
        m.outputs = {oj};
        m.checks.push_back(check_entry("linops/ident1", id1, 0.0, 1e-4, id1 <= 1e-4));
        m.checks.push_back(check_entry("linops/ident2", id2, 0.0, 1e-4, id2 <= 1e-4));
        m.checks.push_back(check_entry("linops/ident3", id3, 0.0, 1e-4, id3 <= 1e-4));
        m.checks.push_back(check_entry("linops/Q_rho", qr_ratio, 1.0, 1e-4, id4 <= 1e-4));
        m.wall_time_s = timer.seconds();
        m.write(lv_out + "_manifest.json");
        std::cout << out.dump() << "\n";
        return 0;
    }

    if (*pb_cmd) {
        const SpatialGrid g = grid_from(L, N);
        const ProfileCoefficients coeffs = build_profile(pb_K, pb_mu, g);
        std::vector<std::string> outputs;
        json manifest = write_profile_outputs(coeffs, pb_out, outputs);
        const std::string mj = pb_out + ".json";
        std::ofstream(mj) << manifest.dump(2) << '\n';
        outputs.push_back(mj);

        RunManifest m;
        m.subcommand = "profile-build";
        m.parameters = {{"K", pb_K}, {"mu", pb_mu}};
        m.grid = grid_json(g);
        m.outputs = outputs;
        m.wall_time_s = timer.seconds();
        m.write(pb_out + "_manifest.json");
        std::cout << "profile written: " << mj << "\n";
        return 0;
    }

    if (*rs_cmd) {
        const SpatialGrid g = grid_from(L, N);
        const ProfileCoefficients coeffs = build_profile(rs_K, rs_mu, g);
        const BivariateSeries psi = make_residual_series(coeffs);
        const double beta = coeffs.beta(0, 0);
        CsvTable t;
        t.columns = {"s", "b", "lambda", "weighted_sup"};
        for (double s : rs_s) {
            const FlowState ap = app_solution(s, beta);
            const PsiResidual r = residual_PsiK(psi, ap.b, ap.lambda);
            t.rows.push_back({s, ap.b, ap.lambda, r.weighted_sup});
        }
        write_table_csv(rs_out, t);

        RunManifest m;
        m.subcommand = "residual-scan";
        m.parameters = {{"K", rs_K}, {"mu", rs_mu}, {"s", rs_s}};
        m.grid = grid_json(g);
        m.outputs = {rs_out};
        m.wall_time_s = timer.seconds();
        m.write(rs_out + "_manifest.json");
        return 0;
    }

    if (*pp_cmd) {
        const auto rows = phase_portrait(pp_beta, pp_lmin, pp_lmax, pp_bmin, pp_bmax, pp_nl, pp_nb);
        CsvTable t;
        t.columns = {"lambda", "b", "dlambda", "db", "on_parabola_flag"};
        for (const auto& r : rows)
            t.rows.push_back({r.lambda, r.b, r.dlambda, r.db, r.on_parabola ? 1.0 : 0.0});
        write_table_csv(pp_out, t);

        RunManifest m;
        m.subcommand = "phase-portrait";
        m.parameters = {{"beta", pp_beta}, {"lambda_min", pp_lmin}, {"lambda_max", pp_lmax},
                        {"b_min", pp_bmin}, {"b_max", pp_bmax},
                        {"n_lambda", pp_nl}, {"n_b", pp_nb}};
        m.grid = json::object();
        m.outputs = {pp_out};
        m.wall_time_s = timer.seconds();
        m.write(pp_out + "_manifest.json");
        return 0;
    }

    if (*li_cmd) {
        const Trajectory traj = integrate(app_solution(li_s0, li_beta), li_beta, li_s1, li_step);
        CsvTable t;
        t.columns = {"s", "lambda", "b", "c0", "t_app"};
        for (const auto& st : traj.states)
            t.rows.push_back({st.s, st.lambda, st.b, conserved_c0(st.lambda, st.b, li_beta), st.t});
        write_table_csv(li_out, t);

        RunManifest m;
        m.subcommand = "law-integrate";
        m.parameters = {{"beta", li_beta}, {"s0", li_s0}, {"s1", li_s1},
                        {"step", li_step}, {"truncated", traj.truncated}};
        m.grid = json::object();
        m.outputs = {li_out};
        m.wall_time_s = timer.seconds();
        m.write(li_out + "_manifest.json");
        return 0;
    }

    if (*sim_cmd) {
        SimulateSpec spec = parse_simulate_config(sim_config);
        if (!sim_out_override.empty()) spec.out_prefix = sim_out_override;
        if (sim_dt_override > 0.0) spec.cfg.dt0 = sim_dt_override;

        const EvolutionResult res = evolve(spec.u0, spec.cfg);

        const std::string rec_csv = spec.out_prefix + "_record.csv";
        write_table_csv(rec_csv, record_table(res.record));
        const std::string fin_csv = spec.out_prefix + "_final.csv";
        write_field_csv(fin_csv, res.u_final);
        std::vector<std::string> outputs = {rec_csv, fin_csv};

        if (!res.record.snapshots.empty()) {
            CsvTable idx;
            idx.columns = {"index", "t"};
            for (std::size_t i = 0; i < res.record.snapshots.size(); ++i) {
                const std::string sp =
                    spec.out_prefix + "_snap_" + std::to_string(i) + ".csv";
                write_field_csv(sp, res.record.snapshots[i].u);
                outputs.push_back(sp);
                idx.rows.push_back({double(i), res.record.snapshots[i].t});
            }
            const std::string idx_csv = spec.out_prefix + "_snapshots.csv";
            write_table_csv(idx_csv, idx);
            outputs.push_back(idx_csv);
        }

        RunManifest m;
        m.subcommand = "simulate";
        m.parameters = {{"config", sim_config},
                        {"mu", spec.cfg.mu},
                        {"dt0", spec.cfg.dt0},
                        {"blowup_flag", res.record.blowup_flag},
                        {"resolution_stop", res.record.resolution_stop},
                        {"shrink_factor", res.record.shrink_factor}};
        m.grid = grid_json(spec.grid);
        m.outputs = outputs;
        m.wall_time_s = timer.seconds();
        m.write(spec.out_prefix + "_manifest.json");
        std::cout << "record: " << rec_csv << " rows=" << res.record.rows.size()
                  << " blowup=" << res.record.blowup_flag << "\n";
        return 0;
    }

    if (*mt_cmd) {
        const ProfileCoefficients coeffs = load_profile(mt_coeffs);
        const CsvTable idx = read_table_csv(mt_in);
        std::vector<Snapshot> snaps;
        const std::string stem = mt_in.substr(0, mt_in.rfind("_snapshots.csv"));
        for (const auto& row : idx.rows) {
            Snapshot s;
            s.t = row[1];
            s.u = read_field_csv(stem + "_snap_" + std::to_string(int(row[0])) + ".csv");
            snaps.push_back(std::move(s));
        }
        ModulationState guess{mt_lambda, mt_b, mt_gamma, mt_s1, snaps.empty() ? 0.0 : snaps[0].t};
        const auto rows = track_snapshots(snaps, coeffs, mt_s1, guess, mt_A);
        write_table_csv(mt_out, mod_table(rows));

        RunManifest m;
        m.subcommand = "modulation-track";
        m.parameters = {{"in", mt_in}, {"coeffs", mt_coeffs}, {"s1", mt_s1}};
        m.grid = grid_json(coeffs.grid());
        m.outputs = {mt_out};
        m.wall_time_s = timer.seconds();
        m.write(mt_out + "_manifest.json");
        return 0;
    }

    if (*bx_cmd) {
        const SpatialGrid yg = grid_from(L, N);
        const ProfileCoefficients coeffs = build_profile(bx_K, bx_mu, yg);
        const double beta = coeffs.beta(0, 0);
        const FinalData fd = final_data(bx_s1, bx_E0, bx_mu);

        // Reference trajectory backward from (lambda1, b1), anchored at
        // t_app(s1).
        FlowState start{bx_s1, fd.lambda1, fd.b1, time_maps(bx_s1, beta).t_app};
        const Trajectory ref = integrate(start, beta, bx_s0, 1e-4);
        const double t1 = start.t, t0 = ref.states.back().t;

        // Physical grid: h^2 <~ 0.069 lambda1^3 (s0/s1)^2 keeps the discrete
        // kinetic-energy deficit from steering the b-equation; the domain
        // encloses the widest profile of the window.
        const double h_target = 0.7 * std::sqrt(0.0688 * std::pow(fd.lambda1, 3)) * (bx_s0 / bx_s1);
        const double lam_wide = ref.states.back().lambda;
        const double half_width = 42.0 * lam_wide;
        std::size_t nodes = std::size_t(2.0 * half_width / h_target) + 1;
        if (nodes % 2 == 0) ++nodes;
        const SpatialGrid xg(half_width, nodes);

        const ComplexField u1 = final_data_field(fd, coeffs, xg);

        EvolutionConfig cfg;
        cfg.mu = bx_mu;
        cfg.dt0 = bx_ds;
        cfg.adapt = true;
        cfg.direction = TimeDirection::backward;
        cfg.t_start = t1;
        cfg.t_end = t0;
        cfg.record_stride = 25;
        cfg.snapshot_count = bx_snaps;
        cfg.blowup_grad_factor = 1e9;
        const EvolutionResult res = evolve(u1, cfg);

        const std::string rec_csv = bx_out + "_record.csv";
        write_table_csv(rec_csv, record_table(res.record));
        const std::string ode_csv = bx_out + "_ode.csv";
        {
            CsvTable t;
            t.columns = {"s", "lambda", "b", "c0", "t"};
            for (const auto& st : ref.states)
                t.rows.push_back({st.s, st.lambda, st.b, conserved_c0(st.lambda, st.b, beta), st.t});
            write_table_csv(ode_csv, t);
        }

        ModulationState guess{fd.lambda1, fd.b1, 0.0, bx_s1, t1};
        const auto rows = track_snapshots(res.record.snapshots, coeffs, bx_s1, guess, 20.0);
        const std::string mod_csv = bx_out + "_mod.csv";
        write_table_csv(mod_csv, mod_table(rows));

        // lambda(t) against the ODE prediction, and the local decay exponent.
        auto ode_lambda_at = [&](double t) {
            std::size_t i = 0;
            while (i + 2 < ref.states.size() && ref.states[i + 1].t > t) ++i;
            const double w = (t - ref.states[i].t) / (ref.states[i + 1].t - ref.states[i].t);
            return ref.states[i].lambda * (1.0 - w) + ref.states[i + 1].lambda * w;
        };
        double worst_rel = 0.0, max_eps = 0.0;
        std::vector<double> abs_t, lams;
        for (const auto& r : rows) {
            worst_rel = std::max(worst_rel, std::abs(r.lambda / ode_lambda_at(r.t) - 1.0));
            max_eps = std::max(max_eps, r.eps_h1);
            abs_t.push_back(-r.t);
            lams.push_back(r.lambda);
        }
        const double exponent = fit_loglog_slope(abs_t, lams);

        json summary{{"lambda1", fd.lambda1},
                     {"b1", fd.b1},
                     {"t1", t1},
                     {"t0", t0},
                     {"grid", grid_json(xg)},
                     {"worst_lambda_rel_vs_ode", worst_rel},
                     {"max_eps_h1", max_eps},
                     {"fitted_exponent", exponent}};
        const std::string sj = bx_out + "_summary.json";
        std::ofstream(sj) << summary.dump(2) << '\n';

        RunManifest m;
        m.subcommand = "blowup-experiment";
        m.parameters = {{"mu", bx_mu}, {"E0", bx_E0}, {"s1", bx_s1}, {"s0", bx_s0},
                        {"K", bx_K}, {"ds", bx_ds}};
        m.grid = grid_json(xg);
        m.outputs = {rec_csv, ode_csv, mod_csv, sj};
        m.checks.push_back(check_entry("blowup/lambda_vs_ode", worst_rel, 0.0, 0.1, worst_rel <= 0.1));
        m.checks.push_back(check_entry("blowup/eps_h1", max_eps, 0.0, 0.1, max_eps <= 0.1));
        m.checks.push_back(
            check_entry("blowup/exponent", exponent, 2.0 / 3.0, 0.1, exponent >= 0.57 && exponent <= 0.77));
        m.wall_time_s = timer.seconds();
        m.write(bx_out + "_manifest.json");
        std::cout << summary.dump() << "\n";
        return 0;
    }

    if (*rp_cmd) {
        json criteria = json::array();
        json runs = json::array();
        std::vector<std::string> names;
        for (const auto& entry : std::filesystem::directory_iterator(rp_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.size() < 14 || name.substr(name.size() - 14) != "_manifest.json") continue;
            names.push_back(entry.path().string());
        }
        std::sort(names.begin(), names.end());
        for (const auto& path : names) {
            std::ifstream is(path);
            json m;
            is >> m;
            runs.push_back({{"file", path}, {"subcommand", m.value("subcommand", std::string())}});
            if (m.contains("checks"))
                for (const auto& c : m["checks"]) criteria.push_back(c);
        }
        json out{{"runs", runs}, {"criteria", criteria}};
        std::ofstream(rp_out) << out.dump(2) << '\n';
        std::cout << "collated " << runs.size() << " manifests\n";
        return 0;
    }

    return 0;
}

}  // namespace
