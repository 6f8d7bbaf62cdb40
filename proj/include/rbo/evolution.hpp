#pragma once

// Time evolution in the Fourier-multiplier form
//     u_t = -d/dx (1 + H)^{-1} (u + u^{p+1}/(p+1)),
// i.e. mode-wise  u_t(n) = -i xi_n / (1 + alpha(xi_n)) (u + u^{p+1}/(p+1))^(n).
// The multiplier is bounded (|xi|/(1+|xi|) <= 1 for rBO, |xi|/(1+xi^2) for
// BBM), so classical RK4 integrates the semi-linear system without stiffness.
//
// Also: conserved quantities E, F, G and the Picard/contraction solver on a
// fixed Simpson time mesh with a measured algebra constant.

#include <cmath>
#include <string>
#include <vector>

#include "rbo/spectral.hpp"

namespace rbo {

// ---------------------------------------------------------------------------
// conserved quantities
// ---------------------------------------------------------------------------

struct ConservedQuantities {
    double E = 0.0;  // (1/2) int ( u H u - 2 u^{p+2} / ((p+1)(p+2)) )
    double F = 0.0;  // (1/2) int ( u^2 + u H u )
    double G = 0.0;  // int u
};

inline ConservedQuantities conserved(const SpectralField& u, int p, const Symbol& alpha) {
    const PeriodicGrid& g = u.grid();
    double quad_alpha = 0.0, quad_l2 = 0.0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        const double e = std::norm(u.coeff(n));
        quad_alpha += alpha.eval(g.xi(n), n).real() * e;
        quad_l2 += e;
    }
    quad_alpha *= g.period();
    quad_l2 *= g.period();
    // int u^{p+2} = (u^{p+1}, u); exact because u is band-limited
    const double power = inner_product(field_pow(u, p + 1), u);
    ConservedQuantities q;
    q.E = 0.5 * (quad_alpha - 2.0 / ((p + 1.0) * (p + 2.0)) * power);
    q.F = 0.5 * (quad_l2 + quad_alpha);
    q.G = g.period() * u.coeff(0).real();
    return q;
}

// ---------------------------------------------------------------------------
// right-hand side
// ---------------------------------------------------------------------------

namespace detail {

/// Multiplier table -i xi_n / (1 + alpha(xi_n)) per bin; throws when 1 + alpha
/// is not safely invertible. The Nyquist entry is zero (odd multiplier).
inline std::vector<cplx> rhs_multiplier(const PeriodicGrid& g, const Symbol& alpha) {
    std::vector<cplx> mult(static_cast<std::size_t>(g.num_points()));
    for (int j = 0; j < g.num_points(); ++j) {
        const int n = g.mode_of_bin(j);
        const double a = alpha.eval(g.xi(n), n).real();
        if (1.0 + a <= 0.0)
            throw precondition_error("rhs: 1 + alpha(xi_n) must stay positive, fails at n = " +
                                     std::to_string(n));
        mult[static_cast<std::size_t>(j)] =
            n == g.mode_max() ? cplx(0.0) : cplx(0.0, -g.xi(n) / (1.0 + a));
    }
    return mult;
}

inline SpectralField apply_rhs(const SpectralField& u, int p, const std::vector<cplx>& mult,
                               bool nonlinear) {
    SpectralField w = nonlinear ? u + (1.0 / (p + 1.0)) * field_pow(u, p + 1) : u;
    for (int j = 0; j < u.grid().num_points(); ++j) w.bin(j) *= mult[static_cast<std::size_t>(j)];
    return w;
}

}  // namespace detail

inline SpectralField rhs(const SpectralField& u, int p, const Symbol& alpha,
                         bool nonlinear = true) {
    return detail::apply_rhs(u, p, detail::rhs_multiplier(u.grid(), alpha), nonlinear);
}

// ---------------------------------------------------------------------------
// RK4 evolution
// ---------------------------------------------------------------------------

struct StepDiagnostics {
    double t = 0.0;
    double E = 0.0, F = 0.0, G = 0.0;
    double norm_half = 0.0;   // H^{1/2}
    double norm_3half = 0.0;  // H^{3/2}
};

enum class EvolveStatus { ok, aborted_nonfinite };

struct Trajectory {
    PeriodicGrid grid;
    std::vector<double> snapshot_times;
    std::vector<SpectralField> states;
    std::vector<StepDiagnostics> diagnostics;  // one entry per step plus t = 0
    EvolveStatus status = EvolveStatus::ok;
    bool tail_warning = false;
    std::string message;

    const SpectralField& final_state() const { return states.back(); }
};

struct EvolveOptions {
    int snapshot_stride = 0;       // 0: keep only the initial and final states
    bool nonlinear = true;
    double tail_threshold = 1e-12; // spectral-tail energy fraction triggering a warning
};

/// Default step min(1e-3, 0.2 / max|u0|).
inline double default_dt(const SpectralField& u0) {
    const double m = sup_norm(u0);
    return m > 0.0 ? std::min(1e-3, 0.2 / m) : 1e-3;
}

inline Trajectory evolve_rk4(const SpectralField& u0, double T, double dt, int p,
                             const Symbol& alpha, const EvolveOptions& opts = {}) {
    require(dt != 0.0 && T != 0.0 && (T > 0.0) == (dt > 0.0),
            "evolve_rk4: T and dt must be nonzero with matching sign");
    const long long steps = std::llround(T / dt);
    require(steps >= 1 && std::abs(T - static_cast<double>(steps) * dt) <= 1e-9 * std::abs(T),
            "evolve_rk4: T must be an integer multiple of dt");

    const PeriodicGrid& g = u0.grid();
    const std::vector<cplx> mult = detail::rhs_multiplier(g, alpha);
    const int tail_cutoff = g.num_points() / 4;

    Trajectory traj{g, {}, {}, {}, EvolveStatus::ok, false, ""};
    traj.snapshot_times.push_back(0.0);
    traj.states.push_back(u0);

    auto diag_at = [&](const SpectralField& u, double t) {
        ConservedQuantities q = conserved(u, p, alpha);
        return StepDiagnostics{t, q.E, q.F, q.G, sobolev_norm(u, 0.5), sobolev_norm(u, 1.5)};
    };
    traj.diagnostics.push_back(diag_at(u0, 0.0));
    if (tail_energy_fraction(u0, tail_cutoff) > opts.tail_threshold) traj.tail_warning = true;

    SpectralField u = u0;
    for (long long step = 1; step <= steps; ++step) {
        const SpectralField k1 = detail::apply_rhs(u, p, mult, opts.nonlinear);
        const SpectralField k2 = detail::apply_rhs(u + (0.5 * dt) * k1, p, mult, opts.nonlinear);
        const SpectralField k3 = detail::apply_rhs(u + (0.5 * dt) * k2, p, mult, opts.nonlinear);
        const SpectralField k4 = detail::apply_rhs(u + dt * k3, p, mult, opts.nonlinear);
        SpectralField next = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        bool finite = true;
        for (const cplx& cval : next.bins())
            if (!std::isfinite(cval.real()) || !std::isfinite(cval.imag())) {
                finite = false;
                break;
            }
        if (!finite) {
            traj.status = EvolveStatus::aborted_nonfinite;
            traj.message = "non-finite state at step " + std::to_string(step) +
                           "; keeping the last valid state";
            traj.snapshot_times.push_back(traj.diagnostics.back().t);
            traj.states.push_back(u);
            break;
        }
        u = next;
        const double t = static_cast<double>(step) * dt;
        traj.diagnostics.push_back(diag_at(u, t));
        if (tail_energy_fraction(u, tail_cutoff) > opts.tail_threshold) traj.tail_warning = true;
        if (opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0 && step != steps) {
            traj.snapshot_times.push_back(t);
            traj.states.push_back(u);
        }
        if (step == steps) {
            traj.snapshot_times.push_back(t);
            traj.states.push_back(u);
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Picard / contraction solver (rBO form: K(u + u^2/2))
// ---------------------------------------------------------------------------

/// Discrete algebra constant sup ||fg||_{H^s} / (||f||_{H^s} ||g||_{H^s}) over
/// a deterministic probe set (plus an optional extra probe).
inline double measure_algebra_constant(const PeriodicGrid& g, double s,
                                       const SpectralField* extra = nullptr) {
    std::vector<SpectralField> probes;
    probes.push_back(field_from_function(g, [&](double x) { return std::cos(g.xi(1) * x); }));
    probes.push_back(field_from_function(
        g, [&](double x) { return std::sin(g.xi(2) * x) + 0.5 * std::cos(g.xi(5) * x); }));
    probes.push_back(field_from_function(
        g, [&](double x) { return 1.0 / (2.0 + std::cos(g.xi(1) * x)); }));
    probes.push_back(field_from_function(
        g, [&](double x) { return std::exp(std::cos(g.xi(3) * x)) - 1.0; }));
    if (extra != nullptr && sobolev_norm(*extra, s) > 0.0) probes.push_back(*extra);

    double c0 = 0.0;
    for (const SpectralField& f : probes)
        for (const SpectralField& h : probes) {
            const double denom = sobolev_norm(f, s) * sobolev_norm(h, s);
            if (denom == 0.0) continue;
            c0 = std::max(c0, sobolev_norm(field_product(f, h), s) / denom);
        }
    return c0;
}

struct PicardResult {
    std::vector<double> times;                // Simpson mesh nodes
    std::vector<SpectralField> fixed_point;   // converged iterate on the mesh
    std::vector<double> distances;            // d_j = sup_t ||u^{j+1} - u^j||_{H^s}
    std::vector<double> ratios;               // d_{j+1} / d_j
    double c0 = 0.0;                          // measured algebra constant
    double radius = 0.0;                      // R = 2 ||u0||_{H^s}
    double T_guaranteed = 0.0;                // (1/2) (1 + c0 R)^{-1}
    int iterations = 0;
    bool converged = false;
    bool non_contractive = false;
    std::string message;
};

inline PicardResult picard_solve(const SpectralField& u0, double T_req, double s = 1.0,
                                 int intervals = 64) {
    require(T_req > 0.0, "picard_solve: T must be positive");
    require(intervals >= 4 && intervals % 2 == 0, "picard_solve: even interval count >= 4");
    const PeriodicGrid& g = u0.grid();

    PicardResult res;
    res.c0 = measure_algebra_constant(g, s, &u0);
    res.radius = 2.0 * sobolev_norm(u0, s);
    res.T_guaranteed = 0.5 / (1.0 + res.c0 * res.radius);
    if (T_req > res.T_guaranteed)
        throw precondition_error(
            "picard_solve: requested T = " + std::to_string(T_req) +
            " exceeds the guaranteed contraction window T = " + std::to_string(res.T_guaranteed) +
            " (R = 2||u0|| = " + std::to_string(res.radius) +
            ", measured c0 = " + std::to_string(res.c0) + ")");

    const int nodes = intervals + 1;
    const double h = T_req / intervals;
    res.times.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) res.times[static_cast<std::size_t>(i)] = i * h;

    // rBO dispersive symbol |xi| gives the multiplier -i xi / (1 + |xi|) = K
    const std::vector<cplx> mult = detail::rhs_multiplier(g, Symbol::hilbert_deriv());
    std::vector<SpectralField> u(static_cast<std::size_t>(nodes), u0);

    // map-evaluation noise (FFT roundoff amplified by the H^s weight) floors
    // the successive distances around 1e-10; below that ratios are meaningless
    const double floor = 1e-10 * std::max(1.0, sobolev_norm(u0, s));
    int bad_streak = 0;
    for (int iter = 0; iter < 80; ++iter) {
        // integrand K(u + u^2/2) at every node
        std::vector<SpectralField> f;
        f.reserve(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) f.push_back(detail::apply_rhs(u[static_cast<std::size_t>(i)], 1, mult, true));

        // cumulative integral: composite Simpson at even nodes, a one-sided
        // three-point rule closes the odd ones
        std::vector<SpectralField> next(static_cast<std::size_t>(nodes), u0);
        SpectralField even_acc(g);
        for (int i = 1; i < nodes; ++i) {
            if (i % 2 == 0) {
                even_acc = even_acc +
                           (h / 3.0) * (f[static_cast<std::size_t>(i - 2)] + 4.0 * f[static_cast<std::size_t>(i - 1)] + f[static_cast<std::size_t>(i)]);
                next[static_cast<std::size_t>(i)] = u0 + even_acc;
            } else {
                SpectralField inc = (h / 12.0) * (5.0 * f[static_cast<std::size_t>(i - 1)] + 8.0 * f[static_cast<std::size_t>(i)] -
                                                  f[static_cast<std::size_t>(i + 1)]);
                next[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i - 1)] + inc;
            }
        }

        double d = 0.0;
        for (int i = 0; i < nodes; ++i)
            d = std::max(d, sobolev_norm(next[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(i)], s));
        u = std::move(next);
        ++res.iterations;

        if (!res.distances.empty() && res.distances.back() > floor)
            res.ratios.push_back(d / res.distances.back());
        res.distances.push_back(d);

        if (d <= floor) {
            res.converged = true;
            break;
        }
        if (!res.ratios.empty() && res.ratios.back() >= 1.0 && d > 1e3 * floor) {
            if (++bad_streak >= 3) {
                res.non_contractive = true;
                res.message =
                    "picard_solve: no contraction for three consecutive iterations; the "
                    "requested horizon exceeded the window the measured constants guarantee";
                break;
            }
        } else {
            bad_streak = 0;
        }
    }
    res.fixed_point = u;
    if (!res.converged && !res.non_contractive)
        res.message = "picard_solve: iteration cap reached before the convergence floor";
    return res;
}

}  // namespace rbo
