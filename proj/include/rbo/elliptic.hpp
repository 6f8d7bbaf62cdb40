#pragma once

// Complete elliptic integrals K(k), E(k) by arithmetic-geometric mean and the
// Jacobi functions sn, cn, dn by the descending Landen (AGM phase) recursion.
// The modulus k is used throughout, never the parameter m = k^2.

#include <cmath>
#include <string>
#include <vector>

#include "rbo/errors.hpp"
#include "rbo/grid.hpp"

namespace rbo {

struct EllipticParams {
    double k = 0.0;       // modulus
    double kprime = 0.0;  // sqrt(1 - k^2)
    double K = 0.0;
    double E = 0.0;
    double Kprime = 0.0;  // K(k')
    double Eprime = 0.0;  // E(k')
    double nome = 0.0;    // q = exp(-pi K'/K)
};

namespace detail {

// AGM iteration; returns K and E for modulus k in (0,1).
inline void agm_complete(double k, double& K_out, double& E_out) {
    double a = 1.0;
    double b = std::sqrt(1.0 - k * k);
    double c = k;
    double sum = 0.5 * c * c;  // 2^{n-1} c_n^2 accumulated, n starting at 0
    double pw = 0.5;
    int iters = 0;
    while (std::abs(c) > 1e-15 && iters < 40) {
        const double an = 0.5 * (a + b);
        const double bn = std::sqrt(a * b);
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pw *= 2.0;
        sum += pw * c * c;
        ++iters;
    }
    K_out = kPi / (2.0 * a);
    E_out = K_out * (1.0 - sum);
}

}  // namespace detail

inline EllipticParams complete_elliptic(double k) {
    require(k > 0.0 && k < 1.0, "complete_elliptic: modulus must lie in (0,1), got k=" +
                                    std::to_string(k));
    EllipticParams p;
    p.k = k;
    p.kprime = std::sqrt((1.0 - k) * (1.0 + k));
    detail::agm_complete(k, p.K, p.E);
    detail::agm_complete(p.kprime, p.Kprime, p.Eprime);
    p.nome = std::exp(-kPi * p.Kprime / p.K);
    return p;
}

/// Legendre relation residual E K' + E' K - K K' - pi/2 (identically zero).
inline double legendre_residual(const EllipticParams& p) {
    return p.E * p.Kprime + p.Eprime * p.K - p.K * p.Kprime - 0.5 * kPi;
}

struct JacobiValues {
    double sn = 0.0, cn = 0.0, dn = 0.0;
};

/// Jacobi elliptic functions at argument u, modulus k in (0,1).
inline JacobiValues jacobi(double u, double k) {
    require(k > 0.0 && k < 1.0, "jacobi: modulus must lie in (0,1)");
    JacobiValues v;
    if (k < 1e-12) {  // trig closure
        v.sn = std::sin(u);
        v.cn = std::cos(u);
        v.dn = 1.0;
        return v;
    }
    const double kp = std::sqrt((1.0 - k) * (1.0 + k));
    if (kp < 1e-12) {  // hyperbolic closure
        v.sn = std::tanh(u);
        v.cn = 1.0 / std::cosh(u);
        v.dn = v.cn;
        return v;
    }
    // ascending AGM scale, then unwind the phase
    std::vector<double> as, cs;
    double a = 1.0, b = kp, c = k;
    as.push_back(a);
    cs.push_back(c);
    int levels = 0;
    while (std::abs(c) > 1e-15 && levels < 40) {
        const double an = 0.5 * (a + b);
        const double bn = std::sqrt(a * b);
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        as.push_back(a);
        cs.push_back(c);
        ++levels;
    }
    // argument reduction by the full period keeps the phase recursion branch-safe
    const double quarterK = kPi / (2.0 * a);
    u -= 4.0 * quarterK * std::round(u / (4.0 * quarterK));
    double phi = std::ldexp(1.0, levels) * a * u;  // 2^n a_n u
    for (int i = levels; i >= 1; --i) {
        phi = 0.5 * (phi + std::asin(std::clamp(cs[static_cast<std::size_t>(i)] / as[static_cast<std::size_t>(i)] * std::sin(phi), -1.0, 1.0)));
    }
    v.sn = std::sin(phi);
    v.cn = std::cos(phi);
    // dn is positive for real u, so the defining identity recovers it safely
    v.dn = std::sqrt(1.0 - k * k * v.sn * v.sn);
    return v;
}

/// dK/dk = (E - k'^2 K) / (k k'^2).
inline double dK_dk(const EllipticParams& p) {
    const double kp2 = p.kprime * p.kprime;
    return (p.E - kp2 * p.K) / (p.k * kp2);
}

/// dK'/dk = -(E' - k^2 K') / (k'^2 k)   (chain rule through k' = sqrt(1-k^2)).
inline double dKprime_dk(const EllipticParams& p) {
    return -(p.Eprime - p.k * p.k * p.Kprime) / (p.kprime * p.kprime * p.k);
}

}  // namespace rbo
