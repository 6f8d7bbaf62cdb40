// rbolab: command-line front end for the periodic travelling-wave laboratory.
//
// Subcommands: wave {rbo,bbm}, spectrum, pf2, lemma71, evolve, picard,
// stability, illposed {scan,nonperiodic}, index, run (config-driven).
//
// Every run writes report.json, CSV/.dat series and a MANIFEST.txt with one
// sha-256 per artifact into its output directory. Exit codes: 0 success,
// 2 precondition violation, 3 numerical failure, 64 unknown command,
// 65 malformed config.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rbo/experiments.hpp"
#include "rbo/linop.hpp"
#include "rbo/serialize.hpp"
#include "run_output.hpp"

using nlohmann::json;
using namespace rbo;
using rbotool::RunWriter;

namespace {

std::filesystem::path resolve_out(const std::string& flag, const std::string& slug) {
    if (!flag.empty()) return flag;
    if (const char* root = std::getenv("RBOLAB_OUT")) return std::filesystem::path(root) / slug;
    return std::filesystem::path("runs") / slug;
}

template <typename F>
void parallel_for(int n, int workers, F&& body) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (std::thread& th : pool) th.join();
}


void write_profile_artifacts(RunWriter& w, const WaveProfile& p) {
    w.write_json("profile.json", profile_to_json(p));
    const std::vector<double> s = inverse_transform(p.field);
    std::vector<std::vector<double>> rows;
    std::vector<double> xs, ys;
    for (int j = 0; j < p.grid.num_points(); ++j) {
        rows.push_back({p.grid.x(j), s[static_cast<std::size_t>(j)]});
        xs.push_back(p.grid.x(j));
        ys.push_back(s[static_cast<std::size_t>(j)]);
    }
    w.write_csv("profile.csv", {"x", "phi"}, rows);
    w.write_dat("profile.dat", "x", "phi", xs, ys);
}

// ---------------------------------------------------------------------------
// command handlers
// ---------------------------------------------------------------------------

void cmd_wave_rbo(double c, double L, int N, const std::string& out) {
    RunWriter w(resolve_out(out, "wave-rbo"));
    PeriodicGrid grid(N, 2.0 * L);
    WaveProfile p = rbo_wave(c, L, grid);

    const double res = rbo_residual(p);
    const double res_rel = res / sup_norm(p.field);

    const double a0 = rbo_coeff(c, L, p.rbo.eta, 0);
    double coeff_resid = 0.0;
    std::vector<std::vector<double>> crows;
    for (int n = 0; n <= std::min(32, N / 4); ++n) {
        const double want = rbo_coeff(c, L, p.rbo.eta, n);
        const double got = p.field.coeff(n).real();
        coeff_resid = std::max(coeff_resid, std::abs(got - want) / a0);
        crows.push_back({static_cast<double>(n), got, want});
    }
    w.write_csv("coeffs.csv", {"n", "fft", "analytic"}, crows);
    write_profile_artifacts(w, p);

    json report;
    report["command"] = "wave rbo";
    report["params"] = {{"c", c}, {"L", L}, {"N", N}};
    report["eta"] = p.rbo.eta;
    report["speed_min"] = rbo_speed_min(L);
    report["peak"] = rbo_profile_value(c, L, p.rbo.eta, 0.0);
    report["mean"] = mean_value(p.field);
    report["residual_max"] = res;
    report["residual_rel"] = res_rel;
    report["coeff_resid_rel_to_a0"] = coeff_resid;
    report["tail_bound"] = p.tail_bound;
    report["pass"] = res_rel < 1e-9 && coeff_resid < 1e-9;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "wave rbo: residual_rel = " << res_rel << ", out = " << w.dir() << "\n";
}

void cmd_wave_bbm(double L, double k, int N, const std::string& branch, bool allow_unstable,
                  const std::string& out) {
    RunWriter w(resolve_out(out, "wave-bbm"));
    const BbmBranch br = branch == "minus" ? BbmBranch::minus : BbmBranch::plus;
    if (br == BbmBranch::minus && !allow_unstable)
        throw precondition_error(
            "wave bbm: the 0 < c < 1 branch is outside the stability theory; pass "
            "--allow-unstable to construct it anyway");

    PeriodicGrid grid(N, L);
    WaveProfile p = bbm_cnoidal(L, k, grid, br);
    const EllipticParams el = complete_elliptic(k);
    const BbmSpeeds speeds = bbm_speed(L, k);
    const BbmSystemResiduals sys = bbm_system_residuals(L, k, br);
    const double ode_res = bbm_ode_residual(p);

    const double k2 = k * k;
    const double L4 = L * L * L * L;
    const double lead = 256.0 * std::pow(el.K, 4) * (1.0 - k2 + k2 * k2) - L4;
    const double quad_res = std::abs(lead * p.speed * p.speed + 2.0 * p.speed * L4 - L4);

    std::vector<std::vector<double>> crows;
    for (int n = 0; n <= std::min(16, N / 8); ++n)
        crows.push_back({static_cast<double>(n), p.field.coeff(n).real(),
                         bbm_coeff(p.speed, L, el, p.bbm.a, n)});
    w.write_csv("coeffs.csv", {"n", "fft", "analytic"}, crows);
    write_profile_artifacts(w, p);

    json report;
    report["command"] = "wave bbm";
    report["params"] = {{"L", L}, {"k", k}, {"N", N}, {"branch", branch}};
    report["c"] = p.speed;
    report["c_plus"] = speeds.c_plus;
    report["c_minus"] = speeds.c_minus;
    report["c_star"] = bbm_speed_min(L);
    report["k_L"] = bbm_kL(L);
    report["system_residuals"] = {sys.r1, sys.r2, sys.r3};
    report["ode_residual_max"] = ode_res;
    report["quadratic_residual"] = quad_res;
    report["d_identity_err"] = std::abs(p.bbm.d - 2.0 * el.K / L);
    report["b_identity_err"] = std::abs(p.bbm.b - 48.0 * p.speed * el.K * el.K / (L * L));
    report["tail_bound"] = p.tail_bound;
    report["pass"] = ode_res < 1e-8 && sys.r1 < 1e-9 && sys.r2 < 1e-9 && sys.r3 < 1e-9 &&
                     quad_res < 1e-11 * L4;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "wave bbm: c = " << p.speed << ", ode residual = " << ode_res
              << ", out = " << w.dir() << "\n";
}

WaveProfile build_profile(const std::string& kind, double c, double L, double k, int N) {
    if (kind == "rbo") {
        PeriodicGrid grid(N, 2.0 * L);
        return rbo_wave(c, L, grid);
    }
    PeriodicGrid grid(N, L);
    return bbm_cnoidal(L, k, grid);
}

Symbol dispersive_symbol(const std::string& kind) {
    return kind == "rbo" ? Symbol::hilbert_deriv() : Symbol::neg_second_deriv();
}

void cmd_spectrum(const std::string& kind, double c, double L, double k, int M, int N,
                  const std::string& out) {
    RunWriter w(resolve_out(out, "spectrum-" + kind));
    if (N <= 0) N = static_cast<int>(fft::next_pow2(static_cast<std::size_t>(4 * M)));
    WaveProfile p = build_profile(kind, c, L, k, N);
    OperatorMatrix op = assemble(p, dispersive_symbol(kind), 1, M);
    EigenReport r = eigen_report(op);

    std::vector<std::vector<double>> rows;
    std::vector<double> idx, ev;
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        rows.push_back({static_cast<double>(i), r.eigenvalues[i]});
        idx.push_back(static_cast<double>(i));
        ev.push_back(r.eigenvalues[i]);
    }
    w.write_csv("spectrum.csv", {"index", "eigenvalue"}, rows);
    w.write_dat("spectrum.dat", "index", "eigenvalue", idx, ev);

    json report;
    report["command"] = "spectrum";
    report["params"] = {{"kind", kind}, {"c", c}, {"L", L}, {"k", k}, {"M", M}, {"N", N}};
    report["speed"] = p.speed;
    report["eigen"] = eigen_report_to_json(r);
    report["gershgorin_tail_clear"] = gershgorin_tail_certificate(op);
    report["pass"] = r.count_negative == 1 && r.zero_count == 1 &&
                     r.alignment_phi_prime > 1.0 - 1e-6 && r.lambda2 > 0.0;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "spectrum " << kind << ": negatives = " << r.count_negative
              << ", zero modes = " << r.zero_count << ", lambda2 = " << r.lambda2
              << ", out = " << w.dir() << "\n";
}

void cmd_pf2(const std::string& family, double eta, double L, double k, int M,
             const std::string& out) {
    RunWriter w(resolve_out(out, "pf2-" + family));
    std::vector<double> vals;
    if (family == "geometric") {
        for (int n = 0; n <= M; ++n) vals.push_back(std::exp(-eta * n));
    } else if (family == "bbm") {
        vals = bbm_pf2_sequence(L, k, M);
    } else if (family == "linear") {
        for (int n = 0; n <= M; ++n) vals.push_back(1.0 + n);
    } else {
        throw precondition_error("pf2: unknown family '" + family + "'");
    }
    Pf2Result r = pf2_check(vals);

    json report;
    report["command"] = "pf2";
    report["params"] = {{"family", family}, {"eta", eta}, {"L", L}, {"k", k}, {"M", M}};
    report["pass"] = r.pass;
    report["reason"] = r.reason;
    if (r.has_witness)
        report["witness"] = {{"n1", r.witness.n1},
                             {"n2", r.witness.n2},
                             {"m1", r.witness.m1},
                             {"m2", r.witness.m2},
                             {"det", r.witness.det},
                             {"strict_case", r.witness.strict_case}};
    std::vector<std::vector<double>> rows;
    for (int n = 0; n <= M; ++n) rows.push_back({static_cast<double>(n), vals[static_cast<std::size_t>(n)]});
    w.write_csv("sequence.csv", {"n", "alpha_n"}, rows);
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "pf2 " << family << ": " << (r.pass ? "PASS" : "FAIL (" + r.reason + ")")
              << ", out = " << w.dir() << "\n";
}

void cmd_lemma71(double c, double L, int M, int N, const std::string& out) {
    RunWriter w(resolve_out(out, "lemma71"));
    if (N <= 0) N = static_cast<int>(fft::next_pow2(static_cast<std::size_t>(4 * M)));
    PeriodicGrid grid(N, 2.0 * L);
    WaveProfile p = rbo_wave(c, L, grid);
    OperatorMatrix op = assemble(p, Symbol::hilbert_deriv(), 1, M);
    EigenReport er = eigen_report(op);

    SpectralField phi_plus = p.field + apply_symbol(p.field, Symbol::hilbert_deriv());
    SpectralField phiphip = field_product(p.field, apply_symbol(p.field, Symbol::deriv()));
    Eigen::VectorXd c1 = field_to_basis(phi_plus, M);
    Eigen::VectorXd c2 = field_to_basis(phiphip, M);

    const double alpha = constrained_min(op, {c1});
    const double beta = constrained_min(op, {c1, c2});
    const double beta0 = coercivity_estimate(op, {c1, c2});

    auto family = [&](double speed) { return rbo_wave(speed, L, grid); };
    StabilityIndex si = stability_index(family, c, 1e-3, Symbol::hilbert_deriv());
    const double I_analytic = rbo_stability_index_analytic(c, L);
    SpectralField chi = rbo_dwave_dc(c, L, grid);
    const double I_chi = inner_product(chi, phi_plus);

    json report;
    report["command"] = "lemma71";
    report["params"] = {{"c", c}, {"L", L}, {"M", M}, {"N", N}};
    report["alpha"] = alpha;
    report["alpha_over_normA"] = alpha / er.norm_A;
    report["beta"] = beta;
    report["beta0_estimate"] = beta0;
    report["I_finite_difference"] = si.I;
    report["I_analytic"] = I_analytic;
    report["I_chi_pairing"] = I_chi;
    report["dF_dc"] = si.dF_dc;
    report["deta_dc"] = rbo_deta_dc(c, L);
    report["pass"] = std::abs(alpha) < 1e-5 * er.norm_A && beta > 0.0 && I_chi < 0.0 &&
                     std::abs(si.I - I_analytic) < 1e-6 * std::abs(I_analytic);
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "lemma71: alpha/||A|| = " << alpha / er.norm_A << ", beta = " << beta
              << ", I = " << si.I << ", out = " << w.dir() << "\n";
}

void cmd_evolve(const std::string& kind, double c, double L, double k, int N, double dt,
                double T, int stride, const std::string& initial_file,
                const std::string& out) {
    RunWriter w(resolve_out(out, "evolve-" + kind));
    WaveProfile p = build_profile(kind, c, L, k, N);
    SpectralField u0 = p.field;
    if (!initial_file.empty()) {
        std::ifstream in(initial_file);
        if (!in) throw precondition_error("evolve: cannot read initial file " + initial_file);
        json j = json::parse(in);
        WaveProfile loaded = profile_from_json(j);
        require(loaded.grid == p.grid, "evolve: initial profile grid mismatch");
        u0 = loaded.field;
    }
    if (dt <= 0.0) dt = default_dt(u0);

    EvolveOptions opts;
    opts.snapshot_stride = stride;
    Trajectory traj = evolve_rk4(u0, T, dt, 1, dispersive_symbol(kind), opts);
    if (traj.status != EvolveStatus::ok) throw numerical_error("evolve: " + traj.message);

    std::vector<std::vector<double>> rows;
    for (const StepDiagnostics& d : traj.diagnostics)
        rows.push_back({d.t, d.E, d.F, d.G, d.norm_half, d.norm_3half});
    w.write_csv("trajectory.csv", {"t", "E", "F", "G", "norm_half", "norm_3half"}, rows);

    json snaps = json::array();
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        json snap;
        snap["t"] = traj.snapshot_times[i];
        json coeffs = json::array();
        for (int n = p.grid.mode_min(); n <= p.grid.mode_max(); ++n) {
            const cplx cv = traj.states[i].coeff(n);
            coeffs.push_back(json::array({n, cv.real(), cv.imag()}));
        }
        snap["coeffs"] = coeffs;
        snaps.push_back(snap);
    }
    w.write_text("snapshots.json", snaps.dump(2) + "\n");

    const StepDiagnostics& first = traj.diagnostics.front();
    double worstF = 0.0, worstE = 0.0, worstG = 0.0;
    for (const StepDiagnostics& d : traj.diagnostics) {
        worstF = std::max(worstF, std::abs(d.F - first.F) / std::abs(first.F));
        worstE = std::max(worstE, std::abs(d.E - first.E) / std::max(1e-300, std::abs(first.E)));
        worstG = std::max(worstG, std::abs(d.G - first.G));
    }

    // when the initial data is the wave itself, the exact solution is a shift
    double translation_err = -1.0;
    if (initial_file.empty()) {
        SpectralField expect = translate(p.field, -p.speed * T);
        translation_err =
            sobolev_norm(traj.final_state() - expect, 0.5) / sobolev_norm(p.field, 0.5);
    }

    json report;
    report["command"] = "evolve";
    report["params"] = {{"kind", kind}, {"c", c},   {"L", L},           {"k", k},
                        {"N", N},       {"dt", dt}, {"T", T},           {"stride", stride},
                        {"initial", initial_file}};
    report["F_drift_rel"] = worstF;
    report["E_drift_rel"] = worstE;
    report["G_drift_abs"] = worstG;
    report["tail_warning"] = traj.tail_warning;
    if (translation_err >= 0.0) report["translation_err_rel"] = translation_err;
    report["pass"] = worstF < 1e-8 * std::max(1.0, T) &&
                     (translation_err < 0.0 || translation_err < 1e-6 * std::max(1.0, T));
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "evolve " << kind << ": F drift = " << worstF << ", out = " << w.dir() << "\n";
}

void cmd_picard(double norm_target, double T, int N, double s, int intervals,
                const std::string& out) {
    RunWriter w(resolve_out(out, "picard"));
    PeriodicGrid grid(N, 2.0 * kPi);
    SpectralField shape = field_from_function(grid, [](double x) { return std::cos(x); });
    SpectralField u0 = (norm_target / sobolev_norm(shape, s)) * shape;

    PicardResult r = picard_solve(u0, T, s, intervals);
    if (r.non_contractive) throw numerical_error(r.message);

    Trajectory t = evolve_rk4(u0, T, std::min(1e-3, T / 64.0), 1, Symbol::hilbert_deriv());
    const double rk4_rel = sobolev_norm(r.fixed_point.back() - t.final_state(), s) /
                           sobolev_norm(t.final_state(), s);

    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < r.distances.size(); ++j)
        rows.push_back({static_cast<double>(j), r.distances[j],
                        j < r.ratios.size() + 1 && j >= 1 ? r.ratios[j - 1] : 0.0});
    w.write_csv("iterations.csv", {"iteration", "distance", "ratio"}, rows);

    json report;
    report["command"] = "picard";
    report["params"] = {{"norm", norm_target}, {"T", T}, {"N", N}, {"s", s},
                        {"intervals", intervals}};
    report["c0"] = r.c0;
    report["radius"] = r.radius;
    report["T_guaranteed"] = r.T_guaranteed;
    report["iterations"] = r.iterations;
    report["converged"] = r.converged;
    report["ratios"] = r.ratios;
    report["rk4_match_rel"] = rk4_rel;
    double worst_ratio = 0.0;
    for (std::size_t j = 2; j < r.ratios.size(); ++j)
        worst_ratio = std::max(worst_ratio, r.ratios[j]);
    report["max_ratio_past_second"] = worst_ratio;
    report["pass"] = r.converged && worst_ratio <= 0.55 && rk4_rel < 1e-6;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "picard: T_guaranteed = " << r.T_guaranteed << ", rk4 match = " << rk4_rel
              << ", out = " << w.dir() << "\n";
}

void cmd_stability(double c, double L, int N, double delta, double T, double dt, int stride,
                   const std::string& norm_name, bool no_project, int pert_mode,
                   const std::string& out) {
    RunWriter w(resolve_out(out, "stability"));
    PeriodicGrid grid(N, 2.0 * L);
    WaveProfile p = rbo_wave(c, L, grid);

    StabilityRunOptions opts;
    if (norm_name == "weighted")
        opts.norm = OrbitalNorm::weighted(c);
    else if (norm_name == "h1")
        opts.norm = OrbitalNorm::sobolev(1.0);
    else
        opts.norm = OrbitalNorm::sobolev(0.5);
    opts.project_F = !no_project;
    opts.dt = dt;
    opts.output_stride = stride;

    SpectralField pert = field_from_function(
        grid, [&](double x) { return std::cos(pert_mode * grid.xi(1) * x); });
    StabilityRun run = stability_run(p, delta, T, pert, opts);
    if (run.status != EvolveStatus::ok)
        throw numerical_error("stability: integrator aborted mid-run");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < run.times.size(); ++i)
        rows.push_back({run.times[i], run.distances[i], run.shifts[i], run.compat[i]});
    w.write_csv("series.csv", {"t", "distance", "shift", "compat"}, rows);
    w.write_dat("distance.dat", "t", "distance", run.times, run.distances);

    // linear drift of d(t) over the second half of the horizon
    std::vector<double> t2, d2;
    for (std::size_t i = 0; i < run.times.size(); ++i)
        if (run.times[i] >= 0.5 * T) {
            t2.push_back(run.times[i]);
            d2.push_back(run.distances[i]);
        }
    const LineFit fit = line_fit(t2, d2);

    json report;
    report["command"] = "stability";
    report["params"] = {{"c", c},   {"L", L},         {"N", N},
                        {"delta", delta}, {"T", T},   {"dt", dt},
                        {"stride", stride}, {"norm", norm_name},
                        {"project_F", !no_project}, {"pert_mode", pert_mode}};
    report["d0"] = run.d0;
    report["max_ratio"] = run.max_ratio;
    report["F_mismatch"] = run.F_mismatch;
    report["shift_jump"] = run.shift_jump;
    report["second_half_slope"] = fit.slope;
    report["second_half_slope_limit"] = 1e-4 * delta;
    report["tail_warning"] = run.tail_warning;
    report["pass"] = !run.shift_jump && (delta == 0.0 || fit.slope < 1e-4 * delta);
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "stability: max d/delta = " << run.max_ratio
              << ", second-half slope = " << fit.slope << ", out = " << w.dir() << "\n";
}

void cmd_illposed_scan(double s, double t, int Nmin, int Nmax, const std::string& out) {
    RunWriter w(resolve_out(out, "illposed-scan"));
    std::vector<int> Ns;
    for (int N = Nmin; N <= Nmax; N *= 2) Ns.push_back(N);
    IllposedScan scan = illposed_scan(s, t, Ns);

    std::vector<std::vector<double>> rows;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < scan.N.size(); ++i) {
        rows.push_back({static_cast<double>(scan.N[i]), scan.ratios[i]});
        lx.push_back(std::log(static_cast<double>(scan.N[i])));
        ly.push_back(std::log(scan.ratios[i]));
    }
    w.write_csv("ratios.csv", {"N", "ratio"}, rows);
    w.write_dat("scan.dat", "log_N", "log_ratio", lx, ly);

    json report;
    report["command"] = "illposed scan";
    report["params"] = {{"s", s}, {"t", t}, {"Nmin", Nmin}, {"Nmax", Nmax}};
    report["slope"] = scan.slope;
    report["predicted"] = scan.predicted;
    report["fit_rms"] = scan.fit_rms;
    report["onset_N"] = scan.N[static_cast<std::size_t>(scan.onset_index)];
    report["degenerate"] = scan.degenerate;
    report["pass"] = scan.pass;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "illposed scan: slope = " << scan.slope << " (predicted " << scan.predicted
              << "), out = " << w.dir() << "\n";
}

void cmd_illposed_nonperiodic(double s, double eps, std::vector<int> Ns, long samples,
                              unsigned seed, int workers, const std::string& out) {
    RunWriter w(resolve_out(out, "illposed-nonperiodic"));
    if (Ns.empty()) Ns = {16, 32, 64, 128};

    std::vector<IllposedNonperiodic> results(Ns.size());
    parallel_for(static_cast<int>(Ns.size()), workers, [&](int i) {
        results[static_cast<std::size_t>(i)] = illposed_nonperiodic(Ns[static_cast<std::size_t>(i)], s, eps);
    });

    ChiBound chi = chi_bound_check(Ns.back(), samples, seed);

    std::vector<std::vector<double>> rows;
    double comp_lo = 0.0, comp_hi = 0.0;
    bool all_converged = true;
    for (const IllposedNonperiodic& r : results) {
        rows.push_back({static_cast<double>(r.N), r.lower_bound, r.ratio_proxy, r.compensated});
        comp_lo = comp_lo == 0.0 ? r.compensated : std::min(comp_lo, r.compensated);
        comp_hi = std::max(comp_hi, r.compensated);
        all_converged = all_converged && r.converged;
    }
    w.write_csv("lower_bounds.csv", {"N", "lower_bound", "ratio_proxy", "compensated"}, rows);

    json report;
    report["command"] = "illposed nonperiodic";
    report["params"] = {{"s", s},       {"eps", eps},   {"N", Ns},
                        {"samples", samples}, {"seed", seed}, {"workers", workers}};
    report["max_chi"] = chi.max_chi;
    report["chi_bound_pass"] = chi.pass;
    report["compensated_variation"] = comp_hi / comp_lo;
    report["all_converged"] = all_converged;
    report["pass"] = chi.pass && all_converged && comp_hi / comp_lo < 2.0;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "illposed nonperiodic: compensated variation = " << comp_hi / comp_lo
              << ", max chi = " << chi.max_chi << ", out = " << w.dir() << "\n";
}

void cmd_index(const std::string& kind, double c, double L, double kmin, double kmax,
               int points, double h, int N, int workers, const std::string& out) {
    RunWriter w(resolve_out(out, "index-" + kind));
    json report;
    report["command"] = "index";

    if (kind == "rbo") {
        PeriodicGrid grid(N, 2.0 * L);
        auto family = [&](double speed) { return rbo_wave(speed, L, grid); };
        StabilityIndex si = stability_index(family, c, h, Symbol::hilbert_deriv());
        const double analytic = rbo_stability_index_analytic(c, L);
        report["params"] = {{"kind", kind}, {"c", c}, {"L", L}, {"N", N}, {"step", h}};
        report["I"] = si.I;
        report["I_analytic"] = analytic;
        report["dF_dc"] = si.dF_dc;
        report["pass"] = si.I < 0.0 && std::abs(si.I - analytic) < 1e-6 * std::abs(analytic);
        w.write_json("report.json", report);
        w.finalize_manifest();
        std::cout << "index rbo: I = " << si.I << ", out = " << w.dir() << "\n";
        return;
    }

    if (kmax <= 0.0) kmax = 0.9 * std::min(bbm_k0(L), bbm_kL(L));
    PeriodicGrid grid(N, L);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(points));
    parallel_for(points, workers, [&](int i) {
        const double k = kmin + (kmax - kmin) * i / std::max(1, points - 1);
        const double speed = bbm_speed(L, k).c_plus;
        // the admissibility gap above c* shrinks like k^4; cap the step by it
        const double h_eff = std::min(h, 0.25 * (speed - bbm_speed_min(L)));
        auto family = [&](double cc) { return bbm_wave_at_speed(L, cc, grid); };
        StabilityIndex si = stability_index(family, speed, h_eff, Symbol::neg_second_deriv());
        BbmScalars sc = bbm_scalars(L, k);
        rows[static_cast<std::size_t>(i)] = {k, speed, si.I, si.dF_dc, sc.dw_dk, sc.a_tilde, sc.s_tilde};
    });
    bool all_negative = true, dw_positive = true, a_increasing = true, c_increasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        all_negative = all_negative && rows[i][2] < 0.0;
        dw_positive = dw_positive && rows[i][4] > 0.0;
        if (i > 0) {
            a_increasing = a_increasing && rows[i][5] > rows[i - 1][5];
            c_increasing = c_increasing && rows[i][1] > rows[i - 1][1];
        }
    }
    w.write_csv("index.csv", {"k", "c", "I", "dF_dc", "dw_dk", "a_tilde", "s_tilde"}, rows);
    std::vector<double> ks, Is;
    for (const std::vector<double>& r : rows) {
        ks.push_back(r[0]);
        Is.push_back(r[2]);
    }
    w.write_dat("index.dat", "k", "I", ks, Is);

    report["params"] = {{"kind", kind},     {"L", L},       {"kmin", kmin}, {"kmax", kmax},
                        {"points", points}, {"step", h},       {"N", N},       {"workers", workers}};
    report["all_I_negative"] = all_negative;
    report["dw_dk_positive"] = dw_positive;
    report["a_tilde_increasing"] = a_increasing;
    report["c_increasing"] = c_increasing;
    report["pass"] = all_negative && dw_positive && a_increasing && c_increasing;
    w.write_json("report.json", report);
    w.finalize_manifest();
    std::cout << "index bbm: all I < 0: " << (all_negative ? "yes" : "no")
              << ", out = " << w.dir() << "\n";
}

// ---------------------------------------------------------------------------
// app wiring
// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, int depth);

void cmd_run(const std::string& config_path, const std::vector<std::string>& extras,
             int depth) {
    std::ifstream in(config_path);
    if (!in) throw precondition_error("run: cannot open config " + config_path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("run: malformed config: ") + e.what());
    }
    if (!cfg.contains("command") || !cfg["command"].is_string())
        throw std::invalid_argument("run: config needs a string 'command'");

    std::vector<std::string> args;
    std::istringstream cmd(cfg["command"].get<std::string>());
    std::string tok;
    while (cmd >> tok) {
        if (tok == "run") throw std::invalid_argument("run: nested 'run' commands not allowed");
        args.push_back(tok);
    }
    auto push_params = [&](const json& obj) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (it.value().is_boolean()) {
                if (it.value().get<bool>()) args.push_back("--" + it.key());
            } else if (it.value().is_string()) {
                args.push_back("--" + it.key());
                args.push_back(it.value().get<std::string>());
            } else if (it.value().is_array()) {
                for (const json& v : it.value()) {
                    args.push_back("--" + it.key());
                    args.push_back(v.dump());
                }
            } else {
                args.push_back("--" + it.key());
                args.push_back(it.value().dump());
            }
        }
    };
    if (cfg.contains("params")) push_params(cfg["params"]);
    if (cfg.contains("overrides")) push_params(cfg["overrides"]);
    if (cfg.contains("out")) {
        args.push_back("--out");
        args.push_back(cfg["out"].get<std::string>());
    }
    if (cfg.contains("seed")) {
        args.push_back("--seed");
        args.push_back(cfg["seed"].dump());
    }
    // command-line extras come last so they win under take_last
    for (const std::string& e : extras) args.push_back(e);

    const int code = dispatch(args, depth + 1);
    if (code != 0) throw numerical_error("run: dispatched command exited " + std::to_string(code));
}

int dispatch(const std::vector<std::string>& args, int depth) {
    if (depth > 2) throw std::invalid_argument("run: config recursion too deep");

    CLI::App app{"rbolab: periodic travelling waves of the regularized Benjamin-Ono and "
                 "BBM equations"};
    app.require_subcommand(1);

    auto opt = [](CLI::Option* o) { return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };

    // wave
    CLI::App* wave = app.add_subcommand("wave", "construct a travelling wave");
    wave->require_subcommand(1);
    struct {
        double c = 4.0, L = 2.0 * kPi;
        int N = 256;
        std::string out;
    } wr;
    CLI::App* wave_rbo_cmd = wave->add_subcommand("rbo", "rBO sinh/cosh family on [-L, L]");
    opt(wave_rbo_cmd->add_option("--c", wr.c, "wave speed (> 1 + pi/(L-pi))"));
    opt(wave_rbo_cmd->add_option("--L", wr.L, "half period (> pi)"));
    opt(wave_rbo_cmd->add_option("--N", wr.N, "grid points"));
    opt(wave_rbo_cmd->add_option("--out", wr.out, "output directory"));
    wave_rbo_cmd->callback([&] { cmd_wave_rbo(wr.c, wr.L, wr.N, wr.out); });

    struct {
        double L = 8.0, k = 0.5;
        int N = 512;
        std::string branch = "plus", out;
        bool allow_unstable = false;
    } wb;
    CLI::App* wave_bbm_cmd = wave->add_subcommand("bbm", "BBM cnoidal family on [0, L]");
    opt(wave_bbm_cmd->add_option("--L", wb.L, "period (> 2 pi)"));
    opt(wave_bbm_cmd->add_option("--k", wb.k, "elliptic modulus in (0, k_L)"));
    opt(wave_bbm_cmd->add_option("--N", wb.N, "grid points"));
    opt(wave_bbm_cmd->add_option("--branch", wb.branch, "plus|minus"));
    wave_bbm_cmd->add_flag("--allow-unstable", wb.allow_unstable,
                           "permit the 0 < c < 1 branch");
    opt(wave_bbm_cmd->add_option("--out", wb.out, "output directory"));
    wave_bbm_cmd->callback(
        [&] { cmd_wave_bbm(wb.L, wb.k, wb.N, wb.branch, wb.allow_unstable, wb.out); });

    // spectrum
    struct {
        std::string kind = "rbo", out;
        double c = 4.0, L = 2.0 * kPi, k = 0.5;
        int M = 96, N = 0;
    } sp;
    CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "linearized-operator spectrum");
    opt(spectrum_cmd->add_option("--kind", sp.kind, "rbo|bbm")
            ->check(CLI::IsMember({"rbo", "bbm"})));
    opt(spectrum_cmd->add_option("--c", sp.c, "rBO speed"));
    opt(spectrum_cmd->add_option("--L", sp.L, "rBO half period / BBM period"));
    opt(spectrum_cmd->add_option("--k", sp.k, "BBM modulus"));
    opt(spectrum_cmd->add_option("--M", sp.M, "mode truncation"));
    opt(spectrum_cmd->add_option("--N", sp.N, "grid points (0: derive from M)"));
    opt(spectrum_cmd->add_option("--out", sp.out, "output directory"));
    spectrum_cmd->callback([&] {
        if (sp.kind == "bbm" && sp.L <= 2.0 * kPi) sp.L = 8.0;
        cmd_spectrum(sp.kind, sp.c, sp.L, sp.k, sp.M, sp.N, sp.out);
    });

    // pf2
    struct {
        std::string family = "geometric", out;
        double eta = 0.8, L = 8.0, k = 0.5;
        int M = 16;
    } pf;
    CLI::App* pf2_cmd = app.add_subcommand("pf2", "discrete PF(2) class check");
    opt(pf2_cmd->add_option("--family", pf.family, "geometric|bbm|linear"));
    opt(pf2_cmd->add_option("--eta", pf.eta, "geometric decay rate"));
    opt(pf2_cmd->add_option("--L", pf.L, "BBM period"));
    opt(pf2_cmd->add_option("--k", pf.k, "BBM modulus"));
    opt(pf2_cmd->add_option("--M", pf.M, "index window"));
    opt(pf2_cmd->add_option("--out", pf.out, "output directory"));
    pf2_cmd->callback([&] { cmd_pf2(pf.family, pf.eta, pf.L, pf.k, pf.M, pf.out); });

    // lemma71
    struct {
        double c = 4.0, L = 2.0 * kPi;
        int M = 96, N = 0;
        std::string out;
    } lm;
    CLI::App* lemma_cmd = app.add_subcommand("lemma71", "constrained quadratic-form minima");
    opt(lemma_cmd->add_option("--c", lm.c, "wave speed"));
    opt(lemma_cmd->add_option("--L", lm.L, "half period"));
    opt(lemma_cmd->add_option("--M", lm.M, "mode truncation"));
    opt(lemma_cmd->add_option("--N", lm.N, "grid points (0: derive)"));
    opt(lemma_cmd->add_option("--out", lm.out, "output directory"));
    lemma_cmd->callback([&] { cmd_lemma71(lm.c, lm.L, lm.M, lm.N, lm.out); });

    // evolve
    struct {
        std::string kind = "rbo", initial, out;
        double c = 4.0, L = 2.0 * kPi, k = 0.5, dt = 1e-3, T = 1.0;
        int N = 256, stride = 0;
    } ev;
    CLI::App* evolve_cmd = app.add_subcommand("evolve", "RK4 multiplier evolution");
    opt(evolve_cmd->add_option("--kind", ev.kind, "rbo|bbm")
            ->check(CLI::IsMember({"rbo", "bbm"})));
    opt(evolve_cmd->add_option("--c", ev.c, "rBO speed"));
    opt(evolve_cmd->add_option("--L", ev.L, "rBO half period / BBM period"));
    opt(evolve_cmd->add_option("--k", ev.k, "BBM modulus"));
    opt(evolve_cmd->add_option("--N", ev.N, "grid points"));
    opt(evolve_cmd->add_option("--dt", ev.dt, "time step (<= 0: default)"));
    opt(evolve_cmd->add_option("--T", ev.T, "horizon (integer multiple of dt)"));
    opt(evolve_cmd->add_option("--snapshot-stride", ev.stride, "state snapshot stride"));
    opt(evolve_cmd->add_option("--initial", ev.initial, "profile JSON to evolve"));
    opt(evolve_cmd->add_option("--out", ev.out, "output directory"));
    evolve_cmd->callback([&] {
        if (ev.kind == "bbm" && ev.L <= 2.0 * kPi) ev.L = 8.0;
        cmd_evolve(ev.kind, ev.c, ev.L, ev.k, ev.N, ev.dt, ev.T, ev.stride, ev.initial, ev.out);
    });

    // picard
    struct {
        double norm = 0.1, T = 0.25, s = 1.0;
        int N = 128, intervals = 64;
        std::string out;
    } pc;
    CLI::App* picard_cmd = app.add_subcommand("picard", "contraction solver");
    opt(picard_cmd->add_option("--norm", pc.norm, "H^s norm of the cosine data"));
    opt(picard_cmd->add_option("--T", pc.T, "requested horizon"));
    opt(picard_cmd->add_option("--N", pc.N, "grid points"));
    opt(picard_cmd->add_option("--s", pc.s, "Sobolev index"));
    opt(picard_cmd->add_option("--intervals", pc.intervals, "Simpson intervals"));
    opt(picard_cmd->add_option("--out", pc.out, "output directory"));
    picard_cmd->callback([&] { cmd_picard(pc.norm, pc.T, pc.N, pc.s, pc.intervals, pc.out); });

    // stability
    struct {
        double c = 4.0, L = 2.0 * kPi, delta = 1e-3, T = 50.0, dt = 1e-3;
        int N = 256, stride = 50, pert_mode = 1;
        std::string norm = "half", out;
        bool no_project = false;
    } st;
    CLI::App* stability_cmd = app.add_subcommand("stability", "orbital-stability run");
    opt(stability_cmd->add_option("--c", st.c, "wave speed"));
    opt(stability_cmd->add_option("--L", st.L, "half period"));
    opt(stability_cmd->add_option("--N", st.N, "grid points"));
    opt(stability_cmd->add_option("--delta", st.delta, "perturbation size"));
    opt(stability_cmd->add_option("--T", st.T, "horizon"));
    opt(stability_cmd->add_option("--dt", st.dt, "time step"));
    opt(stability_cmd->add_option("--stride", st.stride, "output stride"));
    opt(stability_cmd->add_option("--norm", st.norm, "half|weighted|h1"));
    stability_cmd->add_flag("--no-project", st.no_project, "skip the F normalization");
    opt(stability_cmd->add_option("--pert-mode", st.pert_mode, "perturbation harmonic"));
    opt(stability_cmd->add_option("--out", st.out, "output directory"));
    stability_cmd->callback([&] {
        cmd_stability(st.c, st.L, st.N, st.delta, st.T, st.dt, st.stride, st.norm,
                      st.no_project, st.pert_mode, st.out);
    });

    // illposed
    CLI::App* illposed = app.add_subcommand("illposed", "ill-posedness growth witnesses");
    illposed->require_subcommand(1);
    struct {
        double s = -0.5, t = 1.0;
        int Nmin = 32, Nmax = 2048;
        std::string out;
    } sc;
    CLI::App* scan_cmd = illposed->add_subcommand("scan", "periodic H^s ratio growth in N");
    opt(scan_cmd->add_option("--s", sc.s, "Sobolev index (< 0)"));
    opt(scan_cmd->add_option("--t", sc.t, "time in (0, 2 pi)"));
    opt(scan_cmd->add_option("--Nmin", sc.Nmin, "smallest N (doubling up)"));
    opt(scan_cmd->add_option("--Nmax", sc.Nmax, "largest N"));
    opt(scan_cmd->add_option("--out", sc.out, "output directory"));
    scan_cmd->callback([&] { cmd_illposed_scan(sc.s, sc.t, sc.Nmin, sc.Nmax, sc.out); });

    struct {
        double s = -0.5, eps = 0.2;
        std::vector<int> Ns;
        long samples = 1000000;
        unsigned seed = 20240101;
        int workers = 1;
        std::string out;
    } np;
    CLI::App* nonper_cmd = illposed->add_subcommand("nonperiodic", "real-line lower bound");
    opt(nonper_cmd->add_option("--s", np.s, "Sobolev index (< 0)"));
    opt(nonper_cmd->add_option("--eps", np.eps, "t = N^{-eps}, with -s-eps > 0"));
    nonper_cmd->add_option("--N", np.Ns, "frequency list")->take_all();
    opt(nonper_cmd->add_option("--samples", np.samples, "chi-bound sample count"));
    opt(nonper_cmd->add_option("--seed", np.seed, "chi-bound RNG seed"));
    opt(nonper_cmd->add_option("--workers", np.workers, "parallel workers"));
    opt(nonper_cmd->add_option("--out", np.out, "output directory"));
    nonper_cmd->callback([&] {
        cmd_illposed_nonperiodic(np.s, np.eps, np.Ns, np.samples, np.seed, np.workers, np.out);
    });

    // index
    struct {
        std::string kind = "rbo", out;
        double c = 4.0, L = 2.0 * kPi, kmin = 0.05, kmax = 0.0, h = 1e-4;
        int points = 10, N = 256, workers = 1;
    } ix;
    CLI::App* index_cmd = app.add_subcommand("index", "stability index I = -dF/dc");
    opt(index_cmd->add_option("--kind", ix.kind, "rbo|bbm")
            ->check(CLI::IsMember({"rbo", "bbm"})));
    opt(index_cmd->add_option("--c", ix.c, "rBO speed"));
    opt(index_cmd->add_option("--L", ix.L, "rBO half period / BBM period"));
    opt(index_cmd->add_option("--kmin", ix.kmin, "BBM modulus grid start"));
    opt(index_cmd->add_option("--kmax", ix.kmax, "BBM modulus grid end (0: auto)"));
    opt(index_cmd->add_option("--points", ix.points, "BBM grid size"));
    opt(index_cmd->add_option("--step", ix.h, "finite-difference step in c"));
    opt(index_cmd->add_option("--N", ix.N, "grid points"));
    opt(index_cmd->add_option("--workers", ix.workers, "parallel workers"));
    opt(index_cmd->add_option("--out", ix.out, "output directory"));
    index_cmd->callback([&] {
        if (ix.kind == "bbm" && ix.L <= 2.0 * kPi) ix.L = 8.0;
        cmd_index(ix.kind, ix.c, ix.L, ix.kmin, ix.kmax, ix.points, ix.h, ix.N, ix.workers,
                  ix.out);
    });

    // run (config-driven)
    struct {
        std::string config;
    } rn;
    CLI::App* run_cmd = app.add_subcommand("run", "dispatch a JSON run config");
    run_cmd->add_option("--config", rn.config, "JSON config file")->required();
    run_cmd->allow_extras();
    run_cmd->callback([&] { cmd_run(rn.config, run_cmd->remaining(), depth); });

    std::vector<const char*> argv;
    argv.push_back("rbolab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 65;
    }
    return 0;
}

const char* kKnownCommands[] = {"wave",   "spectrum",  "pf2",   "lemma71", "evolve",
                                "picard", "stability", "illposed", "index", "run"};

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    if (!args.empty() && args[0][0] != '-') {
        bool known = false;
        for (const char* cmd : kKnownCommands) known = known || args[0] == cmd;
        if (!known) {
            std::cerr << "rbolab: unknown command '" << args[0] << "'\n";
            return 64;
        }
    }

    try {
        return dispatch(args, 0);
    } catch (const precondition_error& e) {
        std::cerr << "rbolab: precondition violated: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "rbolab: " << e.what() << "\n";
        return 65;
    } catch (const numerical_error& e) {
        std::cerr << "rbolab: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "rbolab: " << e.what() << "\n";
        return 3;
    }
}
