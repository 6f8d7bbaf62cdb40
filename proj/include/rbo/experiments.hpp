#pragma once

// The two headline experiments:
//
//  * orbital-stability runs: evolve a perturbed travelling wave and track the
//    distance to the wave's orbit  d(t) = inf_y || u(t)(.+y) - phi ||  in a
//    Sobolev or weighted norm, with the optimal shift located by a coarse
//    lattice scan plus golden-section refinement;
//
//  * ill-posedness growth: the second Picard iterate of data N^{-s} cos(Nx)
//    in closed form (cross-validated by Duhamel quadrature), its H^s ratio
//    growth in N, and the non-periodic lower-bound integral over the
//    resonance set Omega_xi.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rbo/evolution.hpp"
#include "rbo/spectral.hpp"
#include "rbo/waves.hpp"

namespace rbo {

// ---------------------------------------------------------------------------
// norms for orbit distances
// ---------------------------------------------------------------------------

struct OrbitalNorm {
    double s = 0.5;               // Sobolev index (integer-mode weights)
    bool weighted_c = false;      // use || . ||_{1/2,c} instead
    double c = 2.0;

    static OrbitalNorm sobolev(double s_) { return {s_, false, 2.0}; }
    static OrbitalNorm weighted(double c_) { return {0.5, true, c_}; }

    double weight(const PeriodicGrid& g, int n) const {
        if (weighted_c) return std::abs(g.xi(n)) + (c - 1.0) / c;
        return std::pow(1.0 + static_cast<double>(n) * n, s);
    }

    double norm(const SpectralField& f) const {
        const PeriodicGrid& g = f.grid();
        double acc = 0.0;
        for (int n = g.mode_min(); n <= g.mode_max(); ++n)
            acc += weight(g, n) * std::norm(f.coeff(n));
        return std::sqrt(g.period() * acc);
    }
};

// ---------------------------------------------------------------------------
// orbital distance
// ---------------------------------------------------------------------------

struct OrbitalDistance {
    double d = 0.0;
    double shift = 0.0;  // y*: the minimizing translation applied to u
};

/// d = inf_y || u(.+y) - ref ||, over a 4N-point coarse lattice refined by
/// golden section to |dy| < 1e-10 P (the coarse scan guards the global
/// minimum).
inline OrbitalDistance orbital_distance(const SpectralField& u, const SpectralField& ref,
                                        const OrbitalNorm& norm = {}) {
    check_same_grid(u, ref, "orbital_distance");
    const PeriodicGrid& g = u.grid();
    const double P = g.period();
    const int n_pts = g.num_points();

    // d^2(y) = P sum w_n |u_n e^{i xi_n y} - r_n|^2, evaluated directly so the
    // near-zero minimum is free of cancellation
    std::vector<double> w(static_cast<std::size_t>(n_pts));
    std::vector<cplx> uc(static_cast<std::size_t>(n_pts)), rc(static_cast<std::size_t>(n_pts));
    std::vector<double> xi(static_cast<std::size_t>(n_pts));
    std::size_t idx = 0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n, ++idx) {
        w[idx] = norm.weight(g, n);
        uc[idx] = u.coeff(n);
        rc[idx] = ref.coeff(n);
        xi[idx] = g.xi(n);
    }

    auto dist2 = [&](double y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < uc.size(); ++i)
            acc += w[i] * std::norm(uc[i] * std::polar(1.0, xi[i] * y) - rc[i]);
        return P * acc;
    };

    const int lattice = 4 * n_pts;
    double best_y = 0.0, best = dist2(0.0);
    for (int j = 1; j < lattice; ++j) {
        const double y = -0.5 * P + P * static_cast<double>(j) / lattice;
        const double v = dist2(y);
        if (v < best) {
            best = v;
            best_y = y;
        }
    }

    // golden-section refinement on the bracketing coarse cell
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_y - P / lattice, b = best_y + P / lattice;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = dist2(x1), f2 = dist2(x2);
    while (b - a > 1e-10 * P) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = dist2(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = dist2(x2);
        }
    }
    double y_ref = 0.5 * (a + b);
    double f_ref = dist2(y_ref);
    // one parabolic vertex step: d^2 is locally quadratic in y, which places
    // the minimizer far more accurately than the bracket width
    const double hp = 1e-8 * P;
    const double fp = dist2(y_ref + hp), fm = dist2(y_ref - hp);
    const double denom = fp - 2.0 * f_ref + fm;
    if (std::isfinite(denom) && denom > 0.0) {
        const double y_par = y_ref - 0.5 * hp * (fp - fm) / denom;
        const double f_par = dist2(y_par);
        if (f_par < f_ref) {
            y_ref = y_par;
            f_ref = f_par;
        }
    }
    double y_star = f_ref < best ? y_ref : best_y;
    double d2 = std::min(f_ref, best);

    y_star -= P * std::round(y_star / P);  // normalize to (-P/2, P/2]
    return {std::sqrt(std::max(0.0, d2)), y_star};
}

// ---------------------------------------------------------------------------
// stability runs
// ---------------------------------------------------------------------------

struct StabilityRunOptions {
    OrbitalNorm norm = OrbitalNorm::sobolev(0.5);
    bool project_F = true;        // rescale u0 so F(u0) = F(phi) to 1e-12
    double dt = 0.0;              // 0: default_dt
    int output_stride = 50;       // orbit distance every this many steps
    int p = 1;
    Symbol alpha = Symbol::hilbert_deriv();
};

struct StabilityRun {
    double delta = 0.0;
    std::vector<double> times;
    std::vector<double> distances;
    std::vector<double> shifts;    // y*(t)
    std::vector<double> compat;    // (v, phi phi') at the optimal shift
    double d0 = 0.0;
    double max_ratio = 0.0;        // max_t d(t) / delta
    bool shift_jump = false;       // min-image gap above P/4 between outputs
    double F_mismatch = 0.0;       // |F(u0) - F(phi)| / |F(phi)|
    EvolveStatus status = EvolveStatus::ok;
    bool tail_warning = false;
};

/// u0 = phi + (perturbation scaled to norm delta), optionally rescaled onto
/// the F level set of phi; both constraints are met by a short fixed-point
/// loop (the renormalizations are O(delta) corrections of each other).
inline SpectralField make_perturbed_initial(const WaveProfile& profile,
                                            const SpectralField& perturbation, double delta,
                                            const StabilityRunOptions& opts) {
    check_same_grid(profile.field, perturbation, "make_perturbed_initial");
    if (delta == 0.0) return profile.field;
    const double pn = opts.norm.norm(perturbation);
    require(pn > 0.0, "make_perturbed_initial: zero perturbation with delta > 0");
    const double F_phi = functional_F(profile.field, opts.alpha);

    SpectralField w = (delta / pn) * perturbation;
    SpectralField u0 = profile.field + w;
    for (int iter = 0; iter < 50; ++iter) {
        if (opts.project_F) {
            const double F_u = functional_F(u0, opts.alpha);
            u0 = std::sqrt(F_phi / F_u) * u0;
            w = u0 - profile.field;
        }
        const double wn = opts.norm.norm(w);
        w = (delta / wn) * w;
        u0 = profile.field + w;
        const double f_rel = std::abs(functional_F(u0, opts.alpha) - F_phi) / std::abs(F_phi);
        const double n_rel = std::abs(opts.norm.norm(w) - delta) / delta;
        if ((!opts.project_F || f_rel <= 1e-12) && n_rel <= 1e-12) break;
    }
    return u0;
}

inline StabilityRun stability_run(const WaveProfile& profile, double delta, double T,
                                  const SpectralField& perturbation,
                                  StabilityRunOptions opts = {}) {
    require(delta >= 0.0, "stability_run: delta >= 0");
    require(delta <= 0.05 * opts.norm.norm(profile.field),
            "stability_run: delta exceeds 5% of the wave's norm");
    const PeriodicGrid& g = profile.grid;

    SpectralField u0 = make_perturbed_initial(profile, perturbation, delta, opts);

    StabilityRun run;
    run.delta = delta;
    const double F_phi = functional_F(profile.field, opts.alpha);
    run.F_mismatch = std::abs(functional_F(u0, opts.alpha) - F_phi) / std::abs(F_phi);

    const double dt = opts.dt > 0.0 ? opts.dt : default_dt(u0);
    EvolveOptions eopts;
    eopts.snapshot_stride = opts.output_stride;
    Trajectory traj = evolve_rk4(u0, T, dt, opts.p, opts.alpha, eopts);
    run.status = traj.status;
    run.tail_warning = traj.tail_warning;

    const SpectralField phi_phip =
        field_product(profile.field, apply_symbol(profile.field, Symbol::deriv()));

    double prev_shift = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const OrbitalDistance od = orbital_distance(traj.states[i], profile.field, opts.norm);
        run.times.push_back(traj.snapshot_times[i]);
        run.distances.push_back(od.d);
        run.shifts.push_back(od.shift);
        const SpectralField v = translate(traj.states[i], od.shift) - profile.field;
        run.compat.push_back(inner_product(v, phi_phip));
        if (have_prev) {
            double gap = std::abs(od.shift - prev_shift);
            gap = std::min(gap, g.period() - gap);  // min-image distance
            if (gap > 0.25 * g.period()) run.shift_jump = true;
        }
        prev_shift = od.shift;
        have_prev = true;
    }
    run.d0 = run.distances.front();
    if (delta > 0.0)
        for (double d : run.distances) run.max_ratio = std::max(run.max_ratio, d / delta);
    return run;
}

/// Least-squares line fit; returns slope, intercept and RMS residual.
struct LineFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
};

inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "line_fit: need two matched samples");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

// ---------------------------------------------------------------------------
// periodic ill-posedness: the second Picard iterate
// ---------------------------------------------------------------------------

/// gamma_N = 2 N^2 / ((1+N)(1+2N)), the resonance frequency.
inline double gamma_n(int N) {
    return 2.0 * static_cast<double>(N) * N / ((1.0 + N) * (1.0 + 2.0 * N));
}

struct Picard2Result {
    SpectralField psi;       // closed form on a grid resolving mode 2N
    double ratio;            // ||psi||_{H^s} / ||phi||_{H^s}^2 (analytic)
    double gamma;
    double psi_norm;
    double phi_norm_sq;
};

namespace detail {

inline void picard2_preconditions(int N, double s, double t) {
    require(s < 0.0, "picard2: needs s < 0");
    require(N >= 1, "picard2: needs N >= 1");
    require(t >= 0.0 && t < 2.0 * kPi, "picard2: needs 0 <= t < 2 pi");
}

}  // namespace detail

/// ||psi||_{H^s} and ||phi||^2_{H^s} from the closed form alone.
inline Picard2Result picard2_closed_form(int N, double s, double t, const PeriodicGrid& grid) {
    detail::picard2_preconditions(N, s, t);
    require(std::abs(grid.period() - 2.0 * kPi) < 1e-12, "picard2: period must be 2 pi");
    require(2 * N < grid.mode_max(), "picard2: grid cannot hold mode 2N");

    const double gamma = gamma_n(N);
    const double b = 2.0 * N / (1.0 + 2.0 * N);  // resonant phase speed of S at 2N
    const double a = 2.0 * N / (1.0 + N);
    const double amp = 0.5 * std::pow(N, -2.0 * s + 1.0) / (gamma * (1.0 + 2.0 * N));

    Picard2Result r{SpectralField(grid), 0.0, gamma, 0.0, 0.0};
    const cplx coeff2N = amp * 0.5 * (std::polar(1.0, -b * t) - std::polar(1.0, -a * t));
    r.psi.set_coeff(2 * N, coeff2N);
    r.psi.set_coeff(-2 * N, std::conj(coeff2N));

    r.psi_norm = std::sqrt(2.0 * kPi * std::pow(1.0 + 4.0 * static_cast<double>(N) * N, s) *
                           2.0 * std::norm(coeff2N));
    r.phi_norm_sq =
        kPi * std::pow(1.0 + static_cast<double>(N) * N, s) * std::pow(N, -2.0 * s);
    r.ratio = r.psi_norm / r.phi_norm_sq;
    return r;
}

/// Closed-form ratio only (no grid), usable up to very large N.
inline double picard2_ratio(int N, double s, double t) {
    detail::picard2_preconditions(N, s, t);
    const double gamma = gamma_n(N);
    const double b = 2.0 * N / (1.0 + 2.0 * N);
    const double a = 2.0 * N / (1.0 + N);
    const double amp = 0.5 * std::pow(N, -2.0 * s + 1.0) / (gamma * (1.0 + 2.0 * N));
    const double mag2 = amp * amp * 0.25 * (2.0 - 2.0 * std::cos((a - b) * t));
    const double psi_norm = std::sqrt(2.0 * kPi * std::pow(1.0 + 4.0 * static_cast<double>(N) * N, s) * 2.0 * mag2);
    const double phi_norm_sq =
        kPi * std::pow(1.0 + static_cast<double>(N) * N, s) * std::pow(N, -2.0 * s);
    return psi_norm / phi_norm_sq;
}

/// Direct Duhamel quadrature of int_0^t S(t-tau) Lambda[(S phi)(S phi)_x] dtau
/// by composite Simpson; the independent cross-check of the closed form.
inline SpectralField duhamel_second_iterate(int N, double s, double t, const PeriodicGrid& grid,
                                            int intervals = 256) {
    detail::picard2_preconditions(N, s, t);
    require(intervals >= 2 && intervals % 2 == 0, "duhamel: even interval count");
    require(2 * N < grid.mode_max(), "duhamel: grid cannot hold mode 2N");
    SpectralField phi = field_from_function(
        grid, [&](double x) { return std::pow(N, -s) * std::cos(N * x); });

    SpectralField acc(grid);
    if (t == 0.0) return acc;
    const double h = t / intervals;
    for (int i = 0; i <= intervals; ++i) {
        const double tau = i * h;
        const SpectralField u = apply_symbol(phi, Symbol::semigroup(tau));
        const SpectralField ux = apply_symbol(u, Symbol::deriv());
        const SpectralField lam = apply_symbol(field_product(u, ux), Symbol::lambda_smooth());
        const SpectralField g = apply_symbol(lam, Symbol::semigroup(t - tau));
        const double wgt = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc = acc + (wgt * h / 3.0) * g;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// scan over N: the growth exponent
// ---------------------------------------------------------------------------

struct IllposedScan {
    double s = 0.0, t = 0.0;
    std::vector<int> N;
    std::vector<double> ratios;
    int onset_index = 0;       // first index used by the final fit
    double slope = 0.0;
    double intercept = 0.0;
    double fit_rms = 0.0;
    double predicted = 0.0;    // -s
    bool degenerate = false;   // all ratios equal; no exponent to fit
    bool pass = false;         // |slope - (-s)| <= 0.02 |s|
};

inline IllposedScan illposed_scan(double s, double t, const std::vector<int>& N_list) {
    require(s < 0.0, "illposed_scan: needs s < 0");
    require(t > 0.0 && t < 2.0 * kPi, "illposed_scan: needs t in (0, 2 pi)");
    require(N_list.size() >= 5, "illposed_scan: need at least five N values");
    for (std::size_t i = 1; i < N_list.size(); ++i)
        require(N_list[i] > N_list[i - 1], "illposed_scan: N_list must increase");

    IllposedScan scan;
    scan.s = s;
    scan.t = t;
    scan.N = N_list;
    scan.predicted = -s;
    for (int N : N_list) scan.ratios.push_back(picard2_ratio(N, s, t));

    double lo = scan.ratios.front(), hi = scan.ratios.front();
    for (double r : scan.ratios) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (hi - lo <= 1e-14 * hi) {
        scan.degenerate = true;
        return scan;
    }

    // drop the smallest N until the log-log fit settles (asymptotic onset)
    std::size_t start = 0;
    while (true) {
        std::vector<double> lx, ly;
        for (std::size_t i = start; i < scan.N.size(); ++i) {
            lx.push_back(std::log(static_cast<double>(scan.N[i])));
            ly.push_back(std::log(scan.ratios[i]));
        }
        const LineFit f = line_fit(lx, ly);
        scan.slope = f.slope;
        scan.intercept = f.intercept;
        scan.fit_rms = f.rms;
        scan.onset_index = static_cast<int>(start);
        if (f.rms < 1e-3 || scan.N.size() - start <= 3) break;
        ++start;
    }
    scan.pass = std::abs(scan.slope - scan.predicted) <= 0.02 * std::abs(s);
    return scan;
}

// ---------------------------------------------------------------------------
// non-periodic lower bound
// ---------------------------------------------------------------------------

/// chi(xi, eta) = p(eta) + p(xi-eta) - p(xi) in product form (positive args).
inline double resonance_chi(double xi, double eta) {
    return eta * (xi - eta) * (2.0 + xi) / ((1.0 + eta) * (1.0 + xi - eta) * (1.0 + xi));
}

struct Interval {
    double lo = 0.0, hi = 0.0;
    double measure() const { return std::max(0.0, hi - lo); }
};

/// Omega_xi = { eta : eta and xi - eta lie in [N, N+1] }.
inline Interval omega_xi(int N, double xi) {
    return {std::max(static_cast<double>(N), xi - N - 1.0),
            std::min(static_cast<double>(N) + 1.0, xi - N)};
}

struct ChiBound {
    double max_chi = 0.0;
    bool pass = false;  // max over samples <= 3
};

inline ChiBound chi_bound_check(int N, long samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(static_cast<double>(N), static_cast<double>(N) + 1.0);
    ChiBound out;
    for (long i = 0; i < samples; ++i) {
        const double eta = dist(rng);
        const double zeta = dist(rng);  // xi - eta
        out.max_chi = std::max(out.max_chi, resonance_chi(eta + zeta, eta));
    }
    out.pass = out.max_chi <= 3.0;
    return out;
}

namespace detail {

inline double sinc(double z) {
    return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
}

// adaptive Simpson with a refinement cap; sets `converged` false on failure
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int depth,
                        bool& converged) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    struct Rec {
        double a, m, b, fa, fm, fb, whole;
        int depth;
    };
    auto simp = [](double a_, double b_, double fa_, double fm_, double fb_) {
        return (b_ - a_) / 6.0 * (fa_ + 4.0 * fm_ + fb_);
    };
    double total = 0.0;
    std::vector<Rec> stack{{a, m, b, fa, fm, fb, simp(a, b, fa, fm, fb), depth}};
    while (!stack.empty()) {
        Rec r = stack.back();
        stack.pop_back();
        const double lm = 0.5 * (r.a + r.m), rm = 0.5 * (r.m + r.b);
        const double flm = f(lm), frm = f(rm);
        const double left = simp(r.a, r.m, r.fa, flm, r.fm);
        const double right = simp(r.m, r.b, r.fm, frm, r.fb);
        if (std::abs(left + right - r.whole) <= 15.0 * tol || r.depth <= 0) {
            if (r.depth <= 0 && std::abs(left + right - r.whole) > 15.0 * tol)
                converged = false;
            total += left + right + (left + right - r.whole) / 15.0;
        } else {
            stack.push_back({r.a, lm, r.m, r.fa, flm, r.fm, left, r.depth - 1});
            stack.push_back({r.m, rm, r.b, r.fm, frm, r.fb, right, r.depth - 1});
        }
    }
    return total;
}

}  // namespace detail

struct IllposedNonperiodic {
    int N = 0;
    double s = 0.0, eps = 0.0, t = 0.0;
    double lower_bound = 0.0;   // sqrt of the outer integral
    double ratio_proxy = 0.0;   // lower_bound / ||phi||^2_{H^s}
    double compensated = 0.0;   // lower_bound * N^{s+eps}
    bool converged = true;
};

/// The section-4 lower-bound integral for data with phi_hat = N^{-s} on
/// [N, N+1], over xi in (2N+1/2, 2N+1) and eta in Omega_xi, at t = N^{-eps}.
inline IllposedNonperiodic illposed_nonperiodic(int N, double s, double eps) {
    require(s < 0.0, "illposed_nonperiodic: needs s < 0");
    require(-s - eps > 0.0, "illposed_nonperiodic: needs -s - eps > 0");
    require(N >= 16, "illposed_nonperiodic: needs N >= 16");

    IllposedNonperiodic out;
    out.N = N;
    out.s = s;
    out.eps = eps;
    out.t = std::pow(N, -eps);
    const double t = out.t;

    bool ok = true;
    auto outer_integrand = [&](double xi) {
        const Interval om = omega_xi(N, xi);
        if (om.measure() <= 0.0) return 0.0;
        bool inner_ok = true;
        const double inner = detail::adaptive_simpson(
            [&](double eta) { return detail::sinc(t * resonance_chi(xi, eta)); }, om.lo, om.hi,
            1e-10, 30, inner_ok);
        if (!inner_ok) ok = false;
        const double amp = xi / (1.0 + xi);
        return std::pow(1.0 + xi * xi, s) * std::pow(N, -4.0 * s) * amp * amp * t * t * inner *
               inner;
    };
    const double outer = detail::adaptive_simpson(outer_integrand, 2.0 * N + 0.5, 2.0 * N + 1.0,
                                                  1e-12, 30, ok);
    out.converged = ok;
    out.lower_bound = std::sqrt(std::max(0.0, outer));

    bool norm_ok = true;
    const double phi_norm_sq = std::pow(N, -2.0 * s) *
                               detail::adaptive_simpson(
                                   [&](double xi) { return std::pow(1.0 + xi * xi, s); },
                                   static_cast<double>(N), static_cast<double>(N) + 1.0, 1e-12,
                                   30, norm_ok);
    out.converged = out.converged && norm_ok;
    out.ratio_proxy = out.lower_bound / phi_norm_sq;
    out.compensated = out.lower_bound * std::pow(N, s + eps);
    return out;
}

}  // namespace rbo
