#pragma once

// SpectralField: Fourier coefficients of a real periodic function, with the
// normalization  f_hat(n) = (1/P) \int f(x) e^{-i xi_n x} dx,  stored in FFT
// bin layout. Transforms, multiplier application, Sobolev norms, pairings and
// dealiased products live here.
//
// Sample points sit at x_j = -P/2 + j P/N, which shows up as a (-1)^n twist
// relative to the plain DFT.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "rbo/errors.hpp"
#include "rbo/fft.hpp"
#include "rbo/grid.hpp"
#include "rbo/symbols.hpp"

namespace rbo {

using cplx = std::complex<double>;

class SpectralField {
public:
    explicit SpectralField(const PeriodicGrid& grid)
        : grid_(grid), coeffs_(static_cast<std::size_t>(grid.num_points()), cplx(0.0)) {}

    const PeriodicGrid& grid() const { return grid_; }

    cplx coeff(int n) const { return coeffs_[static_cast<std::size_t>(grid_.bin_of_mode(n))]; }
    void set_coeff(int n, cplx v) { coeffs_[static_cast<std::size_t>(grid_.bin_of_mode(n))] = v; }

    cplx& bin(int j) { return coeffs_[static_cast<std::size_t>(j)]; }
    const cplx& bin(int j) const { return coeffs_[static_cast<std::size_t>(j)]; }
    std::vector<cplx>& bins() { return coeffs_; }
    const std::vector<cplx>& bins() const { return coeffs_; }

    static SpectralField from_modes(const PeriodicGrid& grid,
                                    const std::function<cplx(int n)>& fn) {
        SpectralField f(grid);
        for (int n = grid.mode_min(); n <= grid.mode_max(); ++n) f.set_coeff(n, fn(n));
        return f;
    }

private:
    PeriodicGrid grid_;
    std::vector<cplx> coeffs_;
};

inline void check_same_grid(const SpectralField& a, const SpectralField& b,
                            const std::string& where) {
    if (a.grid() != b.grid()) throw grid_mismatch_error(where + ": grid mismatch");
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

/// Forward transform of N real samples taken at x_j = -P/2 + jP/N.
inline SpectralField transform(const PeriodicGrid& grid, const std::vector<double>& samples) {
    const int n_pts = grid.num_points();
    require(static_cast<int>(samples.size()) == n_pts,
            "transform: expected " + std::to_string(n_pts) + " samples, got " +
                std::to_string(samples.size()));
    std::vector<cplx> buf(samples.begin(), samples.end());
    fft::forward_inplace(buf);
    SpectralField out(grid);
    const double scale = 1.0 / n_pts;
    for (int j = 0; j < n_pts; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;  // e^{i xi_n P/2} = (-1)^n
        out.bin(j) = buf[static_cast<std::size_t>(j)] * (sign * scale);
    }
    return out;
}

/// Inverse transform back to real samples; exact on bandlimited data.
inline std::vector<double> inverse_transform(const SpectralField& f) {
    const int n_pts = f.grid().num_points();
    std::vector<cplx> buf(static_cast<std::size_t>(n_pts));
    for (int j = 0; j < n_pts; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        buf[static_cast<std::size_t>(j)] = f.bin(j) * sign;
    }
    fft::inverse_inplace(buf);
    std::vector<double> out(static_cast<std::size_t>(n_pts));
    for (int j = 0; j < n_pts; ++j) out[static_cast<std::size_t>(j)] = buf[static_cast<std::size_t>(j)].real();
    return out;
}

inline SpectralField field_from_function(const PeriodicGrid& grid,
                                         const std::function<double(double)>& fn) {
    std::vector<double> s(static_cast<std::size_t>(grid.num_points()));
    for (int j = 0; j < grid.num_points(); ++j) s[static_cast<std::size_t>(j)] = fn(grid.x(j));
    return transform(grid, s);
}

// ---------------------------------------------------------------------------
// multipliers
// ---------------------------------------------------------------------------

/// Pointwise multiplier application. The Nyquist mode has no conjugate
/// partner, so it receives the real part of the multiplier (the projection of
/// the flow onto the representable cosine mode); odd symbols annihilate it.
inline SpectralField apply_symbol(const SpectralField& f, const Symbol& sym) {
    const PeriodicGrid& g = f.grid();
    SpectralField out(g);
    const int nyq = g.num_points() / 2;
    for (int j = 0; j < g.num_points(); ++j) {
        const int n = g.mode_of_bin(j);
        const cplx m = sym.eval(g.xi(n), n);
        out.bin(j) = (n == nyq) ? f.bin(j) * m.real() : f.bin(j) * m;
    }
    return out;
}

/// translate(f, y)(x) = f(x + y).
inline SpectralField translate(const SpectralField& f, double y) {
    const PeriodicGrid& g = f.grid();
    SpectralField out(g);
    const int nyq = g.num_points() / 2;
    for (int j = 0; j < g.num_points(); ++j) {
        const int n = g.mode_of_bin(j);
        const double phase = g.xi(n) * y;
        out.bin(j) = (n == nyq) ? f.bin(j) * std::cos(phase)
                                : f.bin(j) * std::polar(1.0, phase);
    }
    return out;
}

// ---------------------------------------------------------------------------
// norms and pairings (integer-index Sobolev weights)
// ---------------------------------------------------------------------------

/// sqrt( P * sum_n (1 + n^2)^s |f_hat(n)|^2 ).
inline double sobolev_norm(const SpectralField& f, double s) {
    const PeriodicGrid& g = f.grid();
    double acc = 0.0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        const double w = std::pow(1.0 + static_cast<double>(n) * n, s);
        acc += w * std::norm(f.coeff(n));
    }
    return std::sqrt(g.period() * acc);
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

/// || f ||_{1/2,c}^2 = ||D^{1/2} f||_{L2}^2 + ((c-1)/c) ||f||_{L2}^2, c > 1.
inline double weighted_half_norm(const SpectralField& f, double c) {
    require(c > 1.0, "weighted_half_norm: needs c > 1");
    const PeriodicGrid& g = f.grid();
    const double w0 = (c - 1.0) / c;
    double acc = 0.0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n)
        acc += (std::abs(g.xi(n)) + w0) * std::norm(f.coeff(n));
    return std::sqrt(g.period() * acc);
}

/// (f, g)_{L2} = P * sum f_hat(n) conj(g_hat(n)); the imaginary residual must
/// vanish for real fields and is checked.
inline double inner_product(const SpectralField& f, const SpectralField& g) {
    check_same_grid(f, g, "inner_product");
    cplx acc(0.0);
    for (int j = 0; j < f.grid().num_points(); ++j) acc += f.bin(j) * std::conj(g.bin(j));
    acc *= f.grid().period();
    if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, std::abs(acc)))
        throw numerical_error("inner_product: imaginary residual " +
                              std::to_string(acc.imag()));
    return acc.real();
}

inline double mean_value(const SpectralField& f) { return f.coeff(0).real(); }

/// F(u) = (1/2) \int (u^2 + u H u) for a dispersive symbol alpha (diagonal).
inline double functional_F(const SpectralField& f, const Symbol& alpha) {
    const PeriodicGrid& g = f.grid();
    double acc = 0.0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n)
        acc += (1.0 + alpha.eval(g.xi(n), n).real()) * std::norm(f.coeff(n));
    return 0.5 * g.period() * acc;
}

inline double sup_norm(const SpectralField& f) {
    const std::vector<double> s = inverse_transform(f);
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
}

/// Max deviation from coeff(-n) = conj(coeff(n)), relative to the largest
/// coefficient.
inline double hermitian_residual(const SpectralField& f) {
    const PeriodicGrid& g = f.grid();
    double scale = 0.0;
    for (const cplx& c : f.bins()) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return 0.0;
    double worst = std::abs(f.coeff(0).imag());
    worst = std::max(worst, std::abs(f.coeff(g.mode_max()).imag()));
    for (int n = 1; n < g.mode_max(); ++n)
        worst = std::max(worst, std::abs(f.coeff(-n) - std::conj(f.coeff(n))));
    return worst / scale;
}

/// Fraction of spectral energy carried by modes |n| >= cutoff.
inline double tail_energy_fraction(const SpectralField& f, int cutoff) {
    const PeriodicGrid& g = f.grid();
    double tail = 0.0, total = 0.0;
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        const double e = std::norm(f.coeff(n));
        total += e;
        if (std::abs(n) >= cutoff) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

// ---------------------------------------------------------------------------
// arithmetic
// ---------------------------------------------------------------------------

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    check_same_grid(a, b, "operator+");
    SpectralField out = a;
    for (int j = 0; j < a.grid().num_points(); ++j) out.bin(j) += b.bin(j);
    return out;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    check_same_grid(a, b, "operator-");
    SpectralField out = a;
    for (int j = 0; j < a.grid().num_points(); ++j) out.bin(j) -= b.bin(j);
    return out;
}

inline SpectralField operator*(double s, const SpectralField& a) {
    SpectralField out = a;
    for (cplx& c : out.bins()) c *= s;
    return out;
}

// ---------------------------------------------------------------------------
// dealiased products
// ---------------------------------------------------------------------------

namespace detail {

// Embed grid modes into a padded bin array of length m (m > N). The Nyquist
// coefficient represents a cosine and is split half-and-half onto +-N/2.
inline std::vector<cplx> pad_modes(const SpectralField& f, std::size_t m) {
    const PeriodicGrid& g = f.grid();
    std::vector<cplx> big(m, cplx(0.0));
    const int nyq = g.mode_max();
    for (int n = g.mode_min(); n < nyq; ++n) {
        const std::size_t jb = n >= 0 ? static_cast<std::size_t>(n)
                                      : m + static_cast<std::size_t>(n);
        big[jb] = f.coeff(n);
    }
    const cplx cn = f.coeff(nyq);
    big[static_cast<std::size_t>(nyq)] = 0.5 * cn;
    big[m - static_cast<std::size_t>(nyq)] = 0.5 * std::conj(cn);
    return big;
}

// Padded coefficients -> physical samples on the m-point grid (same period).
inline std::vector<double> padded_samples(std::vector<cplx> big) {
    const std::size_t m = big.size();
    for (std::size_t j = 0; j < m; ++j)
        if (j % 2 == 1) big[j] = -big[j];
    fft::inverse_inplace(big);
    std::vector<double> s(m);
    for (std::size_t j = 0; j < m; ++j) s[j] = big[j].real();
    return s;
}

// Physical samples on the m-point grid -> coefficients truncated to `grid`.
// The dropped conjugate partner of the Nyquist mode is folded in, which keeps
// the truncated field real-valued.
inline SpectralField truncate_to_grid(const PeriodicGrid& grid, const std::vector<double>& s) {
    const std::size_t m = s.size();
    std::vector<cplx> big(s.begin(), s.end());
    fft::forward_inplace(big);
    const double scale = 1.0 / static_cast<double>(m);
    SpectralField out(grid);
    const int nyq = grid.mode_max();
    for (int n = grid.mode_min(); n <= grid.mode_max(); ++n) {
        const std::size_t jb = n >= 0 ? static_cast<std::size_t>(n)
                                      : m + static_cast<std::size_t>(n);
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        cplx v = big[jb] * (sign * scale);
        if (n == nyq) {
            const std::size_t jneg = m - static_cast<std::size_t>(nyq);
            v += big[jneg] * (sign * scale);
        }
        out.set_coeff(n, v);
    }
    return out;
}

}  // namespace detail

/// Coefficients of the pointwise product f*g, computed on a grid zero-padded
/// to >= 2N so no aliasing reaches the retained modes.
inline SpectralField field_product(const SpectralField& f, const SpectralField& g) {
    check_same_grid(f, g, "field_product");
    const std::size_t n_pts = static_cast<std::size_t>(f.grid().num_points());
    const std::size_t m = fft::next_pow2(2 * n_pts);
    const std::vector<double> sf = detail::padded_samples(detail::pad_modes(f, m));
    const std::vector<double> sg = detail::padded_samples(detail::pad_modes(g, m));
    std::vector<double> prod(m);
    for (std::size_t j = 0; j < m; ++j) prod[j] = sf[j] * sg[j];
    return detail::truncate_to_grid(f.grid(), prod);
}

/// Coefficients of u^q with zero-padding to >= q*N modes (exact convolution).
inline SpectralField field_pow(const SpectralField& f, int q) {
    require(q >= 1, "field_pow: q >= 1");
    if (q == 1) return f;
    const std::size_t n_pts = static_cast<std::size_t>(f.grid().num_points());
    const std::size_t m = fft::next_pow2(static_cast<std::size_t>(q) * n_pts);
    std::vector<double> s = detail::padded_samples(detail::pad_modes(f, m));
    for (double& v : s) v = std::pow(v, q);
    return detail::truncate_to_grid(f.grid(), s);
}

/// Exact quadrature of \int u^q dx via the padded physical grid.
inline double power_integral(const SpectralField& f, int q) {
    require(q >= 1, "power_integral: q >= 1");
    const std::size_t n_pts = static_cast<std::size_t>(f.grid().num_points());
    const std::size_t m = fft::next_pow2(static_cast<std::size_t>(q) * n_pts);
    const std::vector<double> s = detail::padded_samples(detail::pad_modes(f, m));
    double acc = 0.0;
    for (double v : s) acc += std::pow(v, q);
    return acc * f.grid().period() / static_cast<double>(m);
}

/// Discrete convolution (f_hat * g_hat)(n) truncated to the grid, dealiased
/// by zero-padding to length >= 2N.
inline SpectralField convolve_coeffs(const SpectralField& f, const SpectralField& g) {
    return field_product(f, g);
}

}  // namespace rbo
