#pragma once

// Explicit periodic travelling waves.
//
//  * rBO family:  phi_c(x) = (2 c pi / L) sinh(eta) / (cosh(eta) - cos(pi x/L))
//    on [-L, L], eta = atanh(c pi / ((c-1) L)), Fourier coefficients
//    a_n = (2 c pi / L) e^{-eta |n|}. Admissible: L > pi, c > 1 + pi/(L - pi).
//
//  * BBM cnoidal family on [0, L], L > 2 pi:
//    phi_c(x) = beta2 + (beta3 - beta2) cn^2( sqrt((beta3-beta1)/(12 c)) x; k )
//    with the speed solving [256 K^4 (1 - k^2 + k^4) - L^4] c^2 + 2 c L^4 - L^4 = 0.
//
// Constructors sample the closed form and transform; the analytic coefficient
// closures serve as oracles and tail-bound reporters.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "rbo/elliptic.hpp"
#include "rbo/errors.hpp"
#include "rbo/spectral.hpp"

namespace rbo {

enum class WaveKind { rbo, bbm_cnoidal };
enum class BbmBranch { plus, minus };

struct RboParams {
    double c = 0.0;
    double L = 0.0;
    double eta = 0.0;
};

struct BbmParams {
    double c = 0.0;
    double L = 0.0;
    double k = 0.0;
    double w = 0.0;  // solitary-speed parameter, sqrt((w-1)/w) = K/(K' L)
    double a = 0.0;  // mean value (dn^2-form offset)
    double b = 0.0;  // 48 c K^2 / L^2
    double d = 0.0;  // 2 K / L
    double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
    BbmBranch branch = BbmBranch::plus;
};

struct WaveProfile {
    WaveKind kind;
    PeriodicGrid grid;
    SpectralField field;
    double speed = 0.0;
    double tail_bound = 0.0;  // sup-norm bound on the dropped coefficient tail
    RboParams rbo{};
    BbmParams bbm{};
};

// ---------------------------------------------------------------------------
// rBO family
// ---------------------------------------------------------------------------

/// Lower admissible speed for period 2L, L > pi.
inline double rbo_speed_min(double L) { return 1.0 + kPi / (L - kPi); }

/// eta(c) = atanh( c pi / ((c-1) L) ); rejects inadmissible (c, L) naming the
/// parameter-region case.
inline double rbo_eta(double c, double L) {
    if (std::abs(L - kPi) < 1e-12 * kPi)
        throw precondition_error(
            "rbo_eta: L = pi admits only c < 0 (case (a)); the positive branch needs L > pi");
    if (L < kPi)
        throw precondition_error(
            "rbo_eta: L < pi admits only c in (1 + pi/(L-pi), 0) (case (b)); the positive "
            "branch needs L > pi");
    if (c <= rbo_speed_min(L))
        throw precondition_error(
            "rbo_eta: case (c) positive branch requires c > 1 + pi/(L-pi) = " +
            std::to_string(rbo_speed_min(L)) + ", got c = " + std::to_string(c) +
            " (the c < 0 branch gives sign-changing waves and is not constructed)");
    const double x = c * kPi / ((c - 1.0) * L);
    if (!(x > 0.0 && x < 1.0))
        throw numerical_error("rbo_eta: atanh argument left (0,1): " + std::to_string(x));
    return std::atanh(x);
}

/// Analytic Fourier coefficient a_n = (2 c pi / L) e^{-eta |n|}.
inline double rbo_coeff(double c, double L, double eta, int n) {
    return (2.0 * c * kPi / L) * std::exp(-eta * std::abs(n));
}

inline double rbo_profile_value(double c, double L, double eta, double x) {
    return (2.0 * c * kPi / L) * std::sinh(eta) / (std::cosh(eta) - std::cos(kPi * x / L));
}

inline WaveProfile rbo_wave(double c, double L, const PeriodicGrid& grid) {
    require(std::abs(grid.period() - 2.0 * L) <= 1e-12 * L,
            "rbo_wave: grid period must be 2L");
    const double eta = rbo_eta(c, L);
    SpectralField field = field_from_function(
        grid, [&](double x) { return rbo_profile_value(c, L, eta, x); });
    WaveProfile p{WaveKind::rbo, grid, field, c, 0.0, {}, {}};
    p.rbo = {c, L, eta};
    p.tail_bound = (2.0 * c * kPi / L) * std::exp(-eta * grid.num_points() / 2.0) /
                   (1.0 - std::exp(-eta));
    return p;
}

/// Max-norm residual of  c H phi' + (c-1) phi - phi^2 / 2  for a trial field.
inline double rbo_residual(const SpectralField& field, double c) {
    SpectralField res = c * apply_symbol(field, Symbol::hilbert_deriv()) +
                        (c - 1.0) * field - 0.5 * field_pow(field, 2);
    return sup_norm(res);
}

inline double rbo_residual(const WaveProfile& p) { return rbo_residual(p.field, p.speed); }

/// d eta / d c  (negative on the admissible branch).
inline double rbo_deta_dc(double c, double L) {
    const double x = c * kPi / ((c - 1.0) * L);
    return -kPi / ((c - 1.0) * (c - 1.0) * L) / (1.0 - x * x);
}

/// chi = -d phi_c / dc as a spectral field (analytic coefficient derivative).
inline SpectralField rbo_dwave_dc(double c, double L, const PeriodicGrid& grid) {
    require(std::abs(grid.period() - 2.0 * L) <= 1e-12 * L,
            "rbo_dwave_dc: grid period must be 2L");
    const double eta = rbo_eta(c, L);
    const double detadc = rbo_deta_dc(c, L);
    return SpectralField::from_modes(grid, [&](int n) {
        const double e = std::exp(-eta * std::abs(n));
        const double dadc =
            (2.0 * kPi / L) * e - (2.0 * c * kPi / L) * std::abs(n) * e * detadc;
        return cplx(-dadc, 0.0);
    });
}

/// Solitary rBO wave of speed w > 1 on the line.
inline double rbo_solitary_value(double w, double x) {
    const double t = (w - 1.0) / w * x;
    return 4.0 * (w - 1.0) / (1.0 + t * t);
}

// ---------------------------------------------------------------------------
// BBM cnoidal family
// ---------------------------------------------------------------------------

/// c* = 1 + 4 pi^2 / (L^2 - 4 pi^2), the k -> 0 speed limit, L > 2 pi.
inline double bbm_speed_min(double L) {
    return 1.0 + 4.0 * kPi * kPi / (L * L - 4.0 * kPi * kPi);
}

namespace detail {

inline double bbm_discriminant(const EllipticParams& el) {
    const double k2 = el.k * el.k;
    return 16.0 * el.K * el.K * std::sqrt(1.0 - k2 + k2 * k2);
}

// generic bisection to width 1e-12 after a coarse scan bracket
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Largest modulus with L^2 - 16 K^2 sqrt(1 - k^2 + k^4) > 0 on (0, k_L).
inline double bbm_kL(double L) {
    require(L > 2.0 * kPi, "bbm_kL: requires L > 2 pi");
    auto f = [L](double k) { return L * L - detail::bbm_discriminant(complete_elliptic(k)); };
    double lo = 1e-9;
    double hi = lo;
    for (double k = 0.01; k < 1.0; k += 0.01) {
        if (f(k) < 0.0) {
            hi = k;
            break;
        }
        lo = k;
    }
    require(hi > lo, "bbm_kL: no sign change located in (0,1)");
    return detail::bisect_root(f, lo, hi);
}

/// Unique k0 with K(k)/(K(k') L) < 1 exactly on (0, k0).
inline double bbm_k0(double L) {
    require(L > 0.0, "bbm_k0: requires L > 0");
    auto f = [L](double k) {
        const EllipticParams el = complete_elliptic(k);
        return el.K - L * el.Kprime;
    };
    double lo = 1e-9, hi = 1.0 - 1e-12;
    require(f(lo) < 0.0 && f(hi) > 0.0, "bbm_k0: bracket failed");
    return detail::bisect_root(f, lo, hi);
}

struct BbmSpeeds {
    double c_plus = 0.0;   // > 1, the stable construction branch
    double c_minus = 0.0;  // in (0, 1), rejected for stability runs
};

inline BbmSpeeds bbm_speed(double L, double k) {
    require(L > 2.0 * kPi, "bbm_speed: requires L > 2 pi");
    require(k > 0.0 && k < 1.0, "bbm_speed: modulus must lie in (0,1)");
    const EllipticParams el = complete_elliptic(k);
    const double disc = detail::bbm_discriminant(el);
    require(L * L - disc > 0.0,
            "bbm_speed: k >= k_L(L), plus-branch denominator nonpositive");
    return {L * L / (L * L - disc), L * L / (L * L + disc)};
}

/// Solitary BBM wave of speed w > 1 on the line.
inline double bbm_solitary_value(double w, double x) {
    const double s = 1.0 / std::cosh(std::sqrt((w - 1.0) / w) * 0.5 * x);
    return 3.0 * (w - 1.0) * s * s;
}

/// Analytic Fourier coefficients of the cnoidal wave: the mean a(k) at n = 0
/// and (24 pi^2 c / L^2) |n| csch(pi |n| K'/K) otherwise (from the classical
/// dn^2 expansion).
inline double bbm_coeff(double c, double L, const EllipticParams& el, double mean, int n) {
    if (n == 0) return mean;
    const double arg = kPi * std::abs(n) * el.Kprime / el.K;
    return (24.0 * kPi * kPi * c / (L * L)) * std::abs(n) / std::sinh(arg);
}

inline WaveProfile bbm_cnoidal(double L, double k, const PeriodicGrid& grid,
                               BbmBranch branch = BbmBranch::plus) {
    require(std::abs(grid.period() - L) <= 1e-12 * L, "bbm_cnoidal: grid period must be L");
    const BbmSpeeds speeds = bbm_speed(L, k);
    const double c = branch == BbmBranch::plus ? speeds.c_plus : speeds.c_minus;
    const EllipticParams el = complete_elliptic(k);
    const double K2 = el.K * el.K;
    const double kp2 = el.kprime * el.kprime;

    BbmParams bp;
    bp.c = c;
    bp.L = L;
    bp.k = k;
    bp.branch = branch;
    bp.beta2 = 16.0 * c * K2 * (2.0 * kp2 - 1.0) / (L * L) + c - 1.0;
    bp.beta3 = 16.0 * c * K2 * (1.0 + k * k) / (L * L) + c - 1.0;
    bp.beta1 = bp.beta3 - 48.0 * c * K2 / (L * L);
    bp.b = 48.0 * c * K2 / (L * L);
    bp.d = 2.0 * el.K / L;
    bp.a = bp.beta2 - bp.b * kp2 + bp.b * el.E / el.K;  // mean of the profile
    const double ratio = el.K / (el.Kprime * L);
    bp.w = ratio < 1.0 ? 1.0 / (1.0 - ratio * ratio)
                       : std::numeric_limits<double>::infinity();

    const double amp = std::sqrt((bp.beta3 - bp.beta1) / (12.0 * c));
    SpectralField field = field_from_function(grid, [&](double x) {
        const JacobiValues v = jacobi(amp * x, k);
        return bp.beta2 + (bp.beta3 - bp.beta2) * v.cn * v.cn;
    });

    WaveProfile p{WaveKind::bbm_cnoidal, grid, field, c, 0.0, {}, bp};
    double tail = 0.0;
    for (int n = grid.num_points() / 2 + 1; n <= grid.num_points() / 2 + 200; ++n)
        tail += 2.0 * bbm_coeff(c, L, el, bp.a, n);
    p.tail_bound = tail;
    return p;
}

/// Max-norm residual of  c phi'' - (c-1) phi + phi^2 / 2.
inline double bbm_ode_residual(const SpectralField& field, double c) {
    SpectralField res = (-c) * apply_symbol(field, Symbol::neg_second_deriv()) -
                        (c - 1.0) * field + 0.5 * field_pow(field, 2);
    return sup_norm(res);
}

inline double bbm_ode_residual(const WaveProfile& p) {
    return bbm_ode_residual(p.field, p.speed);
}

struct BbmSystemResiduals {
    double r1 = 0.0, r2 = 0.0, r3 = 0.0;  // relative to each equation's scale
};

/// Relative residuals of the defining nonlinear system in (a, b, c, d).
inline BbmSystemResiduals bbm_system_residuals(double L, double k,
                                               BbmBranch branch = BbmBranch::plus) {
    const BbmSpeeds speeds = bbm_speed(L, k);
    const double c = branch == BbmBranch::plus ? speeds.c_plus : speeds.c_minus;
    const EllipticParams el = complete_elliptic(k);
    const double kp2 = el.kprime * el.kprime;
    const double EoverK = el.E / el.K;
    const double d = 2.0 * el.K / L;
    const double b = 48.0 * c * el.K * el.K / (L * L);
    const double a = 16.0 * c * el.K * (3.0 * el.E - (1.0 + kp2) * el.K) / (L * L) + c - 1.0;

    BbmSystemResiduals r;
    {
        const double t1 = 0.5 * b * b, t2 = 6.0 * c * b * d * d;
        r.r1 = std::abs(t1 - t2) / std::max(std::abs(t1), std::abs(t2));
    }
    {
        const double terms[4] = {4.0 * b * d * d * c * (1.0 + kp2), a * b, -b * b * EoverK,
                                 -(c - 1.0) * b};
        double sum = 0.0, scale = 0.0;
        for (double t : terms) {
            sum += t;
            scale = std::max(scale, std::abs(t));
        }
        r.r2 = std::abs(sum) / scale;
    }
    {
        const double terms[6] = {0.5 * a * a,
                                 -a * b * EoverK,
                                 0.5 * b * b * EoverK * EoverK,
                                 -(c - 1.0) * a,
                                 (c - 1.0) * b * EoverK,
                                 -2.0 * c * b * d * d * kp2};
        double sum = 0.0, scale = 0.0;
        for (double t : terms) {
            sum += t;
            scale = std::max(scale, std::abs(t));
        }
        r.r3 = std::abs(sum) / scale;
    }
    return r;
}

struct BbmScalars {
    double c = 0.0;
    double w = 0.0;
    double dw_dk = 0.0;
    double a_tilde = 0.0;
    double s_tilde = 0.0;  // sign reported by callers, not asserted here
    double a = 0.0;
};

inline BbmScalars bbm_scalars(double L, double k) {
    const BbmSpeeds speeds = bbm_speed(L, k);
    const EllipticParams el = complete_elliptic(k);
    const double ratio = el.K / (el.Kprime * L);
    require(ratio < 1.0, "bbm_scalars: k >= k0(L), the parameter w is not finite");

    BbmScalars s;
    s.c = speeds.c_plus;
    s.w = 1.0 / (1.0 - ratio * ratio);

    // w = L^2 K'^2 / (L^2 K'^2 - K^2) differentiated in k
    const double dK = dK_dk(el);
    const double dKp = dKprime_dk(el);
    const double denom = L * L * el.Kprime * el.Kprime - el.K * el.K;
    s.dw_dk = 2.0 * L * L * el.Kprime * el.K * (el.Kprime * dK - el.K * dKp) / (denom * denom);

    const double k2 = k * k;
    const double root = std::sqrt(1.0 - k2 + k2 * k2);
    s.a_tilde = (16.0 * el.K * el.K / (L * L)) * (3.0 * el.E / el.K - 2.0 + k2 + root);
    s.s_tilde = s.a_tilde - (24.0 / (L * L)) * el.K / el.Kprime;
    s.a = s.c * s.a_tilde;
    return s;
}

/// Invert the increasing map k -> c_plus(L, k) by bisection (to 1e-12 in k).
inline double bbm_modulus_for_speed(double L, double c) {
    require(c > bbm_speed_min(L), "bbm_modulus_for_speed: speed below c*(L)");
    const double kL = bbm_kL(L);
    auto f = [&](double k) { return bbm_speed(L, k).c_plus - c; };
    const double lo = 1e-9, hi = kL - 1e-9;
    require(f(lo) < 0.0, "bbm_modulus_for_speed: c below the k->0 limit");
    require(f(hi) > 0.0, "bbm_modulus_for_speed: c beyond the k->k_L range");
    return detail::bisect_root(f, lo, hi);
}

inline WaveProfile bbm_wave_at_speed(double L, double c, const PeriodicGrid& grid) {
    return bbm_cnoidal(L, bbm_modulus_for_speed(L, c), grid, BbmBranch::plus);
}

}  // namespace rbo
