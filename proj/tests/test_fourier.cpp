// =============================================================================
// Fourier core: grids, transforms, multipliers, norms, pairings, dealiased
// convolution. Expected values are either hand arithmetic or an independent
// direct-summation oracle computed in the test.
// =============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rbo/spectral.hpp"

using namespace rbo;
using Catch::Approx;

namespace {

SpectralField random_real_field(const PeriodicGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> s(static_cast<std::size_t>(g.num_points()));
    for (double& v : s) v = dist(rng);
    return transform(g, s);
}

}  // namespace

TEST_CASE("grid construction and frequency ladder") {
    PeriodicGrid g(8, 2.0 * kPi);
    CHECK(g.mode_min() == -3);
    CHECK(g.mode_max() == 4);
    for (int n = g.mode_min(); n <= g.mode_max(); ++n)
        CHECK(g.xi(n) == Approx(static_cast<double>(n)).margin(1e-15));

    PeriodicGrid g2(256, 4.0 * kPi);
    CHECK(g2.xi(1) == Approx(0.5));

    CHECK(g.x(0) == Approx(-kPi));
    CHECK(g.x(4) == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(PeriodicGrid(7, 1.0), precondition_error);
    CHECK_THROWS_AS(PeriodicGrid(6, 1.0), precondition_error);
    CHECK_THROWS_AS(PeriodicGrid(64, 0.0), precondition_error);
    CHECK_THROWS_AS(PeriodicGrid(64, -2.0), precondition_error);
}

TEST_CASE("transform of cos and of a constant") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField f = field_from_function(g, [](double x) { return std::cos(x); });
    CHECK(f.coeff(1).real() == Approx(0.5).margin(1e-14));
    CHECK(f.coeff(-1).real() == Approx(0.5).margin(1e-14));
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        if (n == 1 || n == -1) continue;
        CHECK(std::abs(f.coeff(n)) < 1e-14);
    }

    SpectralField one = field_from_function(g, [](double) { return 1.0; });
    CHECK(one.coeff(0).real() == Approx(1.0));
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        if (n == 0) continue;
        CHECK(std::abs(one.coeff(n)) < 1e-15);
    }
}

TEST_CASE("round trip on random real data") {
    for (int n_pts : {64, 256, 12, 20}) {  // non powers of two exercise Bluestein
        PeriodicGrid g(n_pts, 3.7);
        std::mt19937 rng(17u + static_cast<unsigned>(n_pts));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> s(static_cast<std::size_t>(n_pts));
        for (double& v : s) v = dist(rng);

        const std::vector<double> back = inverse_transform(transform(g, s));
        double worst = 0.0;
        for (int j = 0; j < n_pts; ++j) worst = std::max(worst, std::abs(back[static_cast<std::size_t>(j)] - s[static_cast<std::size_t>(j)]));
        CHECK(worst < 1e-12);

        CHECK(hermitian_residual(transform(g, s)) < 1e-12);
    }

    PeriodicGrid g(64, 2.0);
    std::vector<double> s(10, 0.0);
    CHECK_THROWS_AS(transform(g, s), precondition_error);
}

TEST_CASE("hilbert turns cos into sin") {
    PeriodicGrid g(64, 2.0 * kPi);
    for (int n : {1, 3, 7}) {
        SpectralField f = field_from_function(g, [n](double x) { return std::cos(n * x); });
        SpectralField hf = apply_symbol(f, Symbol::hilbert());
        SpectralField want = field_from_function(g, [n](double x) { return std::sin(n * x); });
        const SpectralField diff = hf - want;
        CHECK(sup_norm(diff) < 1e-13);
    }
}

TEST_CASE("k_rbo on sin(x) at P=2pi gives -cos(x)/2") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField f = field_from_function(g, [](double x) { return std::sin(x); });
    SpectralField kf = apply_symbol(f, Symbol::k_rbo());
    SpectralField want = field_from_function(g, [](double x) { return -0.5 * std::cos(x); });
    CHECK(sup_norm(kf - want) < 1e-13);
}

TEST_CASE("semigroup(0) is the identity; semigroup(t) composes to identity") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField f = random_real_field(g, 3u);
    f.set_coeff(g.mode_max(), 0.0);  // phases at the Nyquist are projected, not invertible
    SpectralField f0 = apply_symbol(f, Symbol::semigroup(0.0));
    CHECK(sup_norm(f0 - f) < 1e-13);

    const double t = 1.7;
    SpectralField round = apply_symbol(apply_symbol(f, Symbol::semigroup(t)), Symbol::semigroup(-t));
    double worst = 0.0;
    for (int j = 0; j < g.num_points(); ++j)
        worst = std::max(worst, std::abs(round.bin(j) - f.bin(j)));
    CHECK(worst < 1e-12);
}

TEST_CASE("hilbert twice is minus identity on mean-zero fields") {
    PeriodicGrid g(64, 5.0);
    SpectralField f = random_real_field(g, 5u);
    f.set_coeff(0, 0.0);
    SpectralField hh = apply_symbol(apply_symbol(f, Symbol::hilbert()), Symbol::hilbert());
    const SpectralField sum = hh + f;  // should vanish except the Nyquist (killed twice)
    for (int n = g.mode_min(); n < g.mode_max(); ++n)
        CHECK(std::abs(sum.coeff(n)) < 1e-14);
}

TEST_CASE("sobolev norms of cos and zero") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField f = field_from_function(g, [](double x) { return std::cos(x); });
    CHECK(sobolev_norm(f, 0.0) == Approx(std::sqrt(kPi)).epsilon(1e-13));
    CHECK(sobolev_norm(f, 1.0) == Approx(std::sqrt(2.0 * kPi)).epsilon(1e-13));

    SpectralField z(g);
    CHECK(sobolev_norm(z, 0.7) == 0.0);
}

TEST_CASE("weighted half norm values and monotonicity in c") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField one = field_from_function(g, [](double) { return 1.0; });
    CHECK(weighted_half_norm(one, 2.0) == Approx(std::sqrt(kPi)).epsilon(1e-13));

    SpectralField f = field_from_function(g, [](double x) { return std::cos(x); });
    CHECK(weighted_half_norm(f, 2.0) == Approx(std::sqrt(kPi + kPi / 2.0)).epsilon(1e-13));

    double prev = 0.0;
    for (double c : {1.5, 2.0, 4.0, 16.0}) {
        const double v = weighted_half_norm(f, c);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(weighted_half_norm(f, 1.0), precondition_error);
}

TEST_CASE("orthogonality and Parseval") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField fc = field_from_function(g, [](double x) { return std::cos(x); });
    SpectralField fs = field_from_function(g, [](double x) { return std::sin(x); });
    CHECK(inner_product(fc, fs) == Approx(0.0).margin(1e-14));

    SpectralField f = random_real_field(g, 11u);
    const std::vector<double> s = inverse_transform(f);
    double quad = 0.0;
    for (double v : s) quad += v * v;
    quad *= g.period() / g.num_points();
    CHECK(inner_product(f, f) == Approx(quad).epsilon(1e-10));
}

TEST_CASE("convolution of constants is the product identity") {
    PeriodicGrid g(32, 2.0 * kPi);
    SpectralField a = field_from_function(g, [](double) { return 3.0; });
    SpectralField b = field_from_function(g, [](double) { return -0.5; });
    SpectralField c = convolve_coeffs(a, b);
    CHECK(c.coeff(0).real() == Approx(-1.5).epsilon(1e-13));
    for (int n = g.mode_min(); n <= g.mode_max(); ++n) {
        if (n == 0) continue;
        CHECK(std::abs(c.coeff(n)) < 1e-13);
    }
}

TEST_CASE("convolution theorem against the direct summation oracle") {
    PeriodicGrid g(32, 4.0);
    SpectralField f = random_real_field(g, 23u);
    SpectralField h = random_real_field(g, 29u);
    f.set_coeff(g.mode_max(), 0.0);  // resolved inputs: the one-sided sum below
    h.set_coeff(g.mode_max(), 0.0);  // is then the exact linear convolution
    SpectralField viaFFT = convolve_coeffs(f, h);

    // direct truncated convolution over the grid-supported coefficients
    // (the output Nyquist folds its conjugate partner and is skipped here)
    for (int n : {-10, -3, 0, 1, 5, 12}) {
        cplx acc(0.0);
        for (int m = g.mode_min(); m <= g.mode_max(); ++m) {
            const int r = n - m;
            if (r < g.mode_min() || r > g.mode_max()) continue;
            acc += f.coeff(m) * h.coeff(r);
        }
        CHECK(std::abs(viaFFT.coeff(n) - acc) < 1e-10);
    }
}

TEST_CASE("rBO coefficient convolution identity (a*a)") {
    // a_n = (2 c pi / L) e^{-eta |n|} with c=4, L=2pi (so eta = ln(5)/2);
    // the closed form of (a*a)(n) is checked against direct summation first.
    const double c = 4.0, L = 2.0 * kPi;
    const double eta = 0.5 * std::log(5.0);
    const double amp = 2.0 * c * kPi / L;
    PeriodicGrid g(256, 2.0 * L);
    SpectralField a = SpectralField::from_modes(
        g, [&](int n) { return cplx(amp * std::exp(-eta * std::abs(n)), 0.0); });

    SpectralField conv = convolve_coeffs(a, a);
    const double coth_eta = 1.0 / std::tanh(eta);
    const double scale = (4.0 * kPi * kPi * c * c / (L * L)) * coth_eta;  // (a*a)(0)
    for (int n = -g.num_points() / 4; n <= g.num_points() / 4; ++n) {
        const double closed =
            (4.0 * kPi * kPi * c * c / (L * L)) * std::exp(-eta * std::abs(n)) * (std::abs(n) + coth_eta);
        // direct summation oracle with a wide margin of extra terms
        double direct = 0.0;
        for (int m = -4000; m <= 4000; ++m)
            direct += amp * std::exp(-eta * std::abs(m)) * amp * std::exp(-eta * std::abs(n - m));
        CHECK(closed == Approx(direct).epsilon(1e-12));
        if (std::abs(n) <= 20) {
            // per-coefficient relative agreement while the values sit well
            // above the double-precision floor of the FFT route
            CHECK(conv.coeff(n).real() == Approx(closed).epsilon(1e-10));
        } else {
            CHECK(std::abs(conv.coeff(n).real() - closed) < 1e-12 * scale);
        }
        CHECK(std::abs(conv.coeff(n).imag()) < 1e-12);
    }
}

TEST_CASE("field powers and power integrals") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField f = field_from_function(g, [](double x) { return 1.0 + std::cos(x); });
    SpectralField f2 = field_pow(f, 2);
    // (1+cos x)^2 = 3/2 + 2 cos x + cos(2x)/2
    CHECK(f2.coeff(0).real() == Approx(1.5).epsilon(1e-13));
    CHECK(f2.coeff(1).real() == Approx(1.0).epsilon(1e-13));
    CHECK(f2.coeff(2).real() == Approx(0.25).epsilon(1e-13));

    CHECK(power_integral(f, 2) == Approx(3.0 * kPi).epsilon(1e-13));
    CHECK(power_integral(f, 3) == Approx(5.0 * kPi).epsilon(1e-13));  // int (1+cos)^3 = 5 pi
}

TEST_CASE("translate shifts the profile") {
    PeriodicGrid g(128, 2.0 * kPi);
    SpectralField f = field_from_function(g, [](double x) { return std::cos(x) + 0.3 * std::sin(2 * x); });
    const double y = 0.83;
    SpectralField shifted = translate(f, y);
    SpectralField want = field_from_function(
        g, [y](double x) { return std::cos(x + y) + 0.3 * std::sin(2 * (x + y)); });
    CHECK(sup_norm(shifted - want) < 1e-13);
}
