#pragma once

// Self-contained complex FFT: iterative radix-2 for power-of-two lengths,
// Bluestein's chirp-z fallback for everything else. No external dependency;
// accuracy is the usual O(eps log N).

#include <complex>
#include <cstdint>
#include <vector>

#include "rbo/errors.hpp"

namespace rbo::fft {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

constexpr double kPi = 3.141592653589793238462643383279502884;

// In-place iterative Cooley-Tukey, length must be a power of two.
// sign = -1 forward (e^{-i...}), +1 inverse (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // per-butterfly twiddle from std::polar keeps rounding ~1 ulp
                const cplx w = std::polar(1.0, ang * static_cast<double>(k));
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

// Bluestein chirp-z for arbitrary length.
inline void fft_bluestein(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    const std::size_t m = next_pow2(2 * n - 1);
    // chirp w_j = exp(sign*i*pi*j^2/n); reduce j^2 mod 2n so the angle stays small
    std::vector<cplx> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t q = (static_cast<std::uint64_t>(j) * j) % (2 * n);
        w[j] = std::polar(1.0, sign * kPi * static_cast<double>(q) / static_cast<double>(n));
    }
    std::vector<cplx> x(m, cplx(0.0)), y(m, cplx(0.0));
    for (std::size_t j = 0; j < n; ++j) x[j] = a[j] * w[j];
    y[0] = std::conj(w[0]);
    for (std::size_t j = 1; j < n; ++j) y[j] = y[m - j] = std::conj(w[j]);
    fft_pow2(x, -1);
    fft_pow2(y, -1);
    for (std::size_t j = 0; j < m; ++j) x[j] *= y[j];
    fft_pow2(x, +1);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * w[j] * scale;
}

}  // namespace detail

/// Unscaled DFT, any length: X_k = sum_j a_j e^{sign * 2*pi*i*j*k/N}.
inline void transform_inplace(std::vector<cplx>& a, int sign) {
    if (a.empty()) return;
    if (is_pow2(a.size()))
        detail::fft_pow2(a, sign);
    else
        detail::fft_bluestein(a, sign);
}

inline void forward_inplace(std::vector<cplx>& a) { transform_inplace(a, -1); }
inline void inverse_inplace(std::vector<cplx>& a) { transform_inplace(a, +1); }

}  // namespace rbo::fft
