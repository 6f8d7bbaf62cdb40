// =============================================================================
// Evolution: multiplier right-hand side, RK4 fidelity, conservation, the
// Picard contraction solver. Oracles: hand multiplier arithmetic, the exact
// travelling-wave translation, the linear semigroup, and RK4 itself for the
// Picard fixed point.
// =============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rbo/evolution.hpp"
#include "rbo/waves.hpp"

using namespace rbo;
using Catch::Approx;

TEST_CASE("rhs of cos(x): hand multiplier arithmetic") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u = field_from_function(g, [](double x) { return std::cos(x); });

    // linear part: K cos = (1/2) sin
    SpectralField lin = rhs(u, 1, Symbol::hilbert_deriv(), false);
    SpectralField want_lin = field_from_function(g, [](double x) { return 0.5 * std::sin(x); });
    CHECK(sup_norm(lin - want_lin) < 1e-13);

    // full: K(cos + cos^2/2) = sin/2 + sin(2x)/6
    SpectralField full = rhs(u, 1, Symbol::hilbert_deriv(), true);
    SpectralField want = field_from_function(
        g, [](double x) { return 0.5 * std::sin(x) + std::sin(2.0 * x) / 6.0; });
    CHECK(sup_norm(full - want) < 1e-13);

    // constants are annihilated
    SpectralField c = field_from_function(g, [](double) { return 2.5; });
    CHECK(sup_norm(rhs(c, 1, Symbol::hilbert_deriv())) < 1e-14);
}

TEST_CASE("wave-frame identity: rhs(phi) = -c phi_x") {
    PeriodicGrid g(256, 4.0 * kPi);
    WaveProfile p = rbo_wave(4.0, 2.0 * kPi, g);
    SpectralField r = rhs(p.field, 1, Symbol::hilbert_deriv());
    SpectralField drift = p.speed * apply_symbol(p.field, Symbol::deriv());
    CHECK(sup_norm(r + drift) < 1e-9);

    PeriodicGrid gb(256, 8.0);
    WaveProfile pb = bbm_cnoidal(8.0, 0.5, gb);
    SpectralField rb = rhs(pb.field, 1, Symbol::neg_second_deriv());
    SpectralField driftb = pb.speed * apply_symbol(pb.field, Symbol::deriv());
    CHECK(sup_norm(rb + driftb) < 1e-9);
}

TEST_CASE("rhs rejects non-invertible 1 + alpha") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u = field_from_function(g, [](double x) { return std::cos(x); });
    Symbol bad = Symbol::custom([](double, int) { return cplx(-1.0, 0.0); },
                                Symbol::Parity::real_even, "minus_one");
    CHECK_THROWS_AS(rhs(u, 1, bad), precondition_error);
}

TEST_CASE("conserved quantities on reference fields") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u = field_from_function(g, [](double x) { return std::cos(x); });
    ConservedQuantities q = conserved(u, 1, Symbol::hilbert_deriv());
    CHECK(q.F == Approx(kPi).epsilon(1e-13));      // (pi + pi)/2
    CHECK(q.E == Approx(kPi / 2.0).epsilon(1e-13));  // int cos^3 = 0
    CHECK(q.G == Approx(0.0).margin(1e-14));

    SpectralField zero(g);
    ConservedQuantities qz = conserved(zero, 1, Symbol::hilbert_deriv());
    CHECK(qz.E == 0.0);
    CHECK(qz.F == 0.0);
    CHECK(qz.G == 0.0);

    // BBM: int u H u = int u_x^2 >= 0
    for (unsigned seed : {1u, 2u, 3u}) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> s(64);
        for (double& v : s) v = dist(rng);
        SpectralField f = transform(g, s);
        double quad = 0.0;
        for (int n = g.mode_min(); n <= g.mode_max(); ++n)
            quad += g.xi(n) * g.xi(n) * std::norm(f.coeff(n));
        CHECK(quad >= 0.0);
    }
}

TEST_CASE("zero initial data stays zero") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField zero(g);
    Trajectory t = evolve_rk4(zero, 0.1, 1e-2, 1, Symbol::hilbert_deriv());
    CHECK(t.status == EvolveStatus::ok);
    CHECK(sup_norm(t.final_state()) == 0.0);
}

TEST_CASE("travelling wave is advected exactly: orbital check with known shift") {
    PeriodicGrid g(256, 4.0 * kPi);
    WaveProfile p = rbo_wave(4.0, 2.0 * kPi, g);
    const double T = 1.5;  // about half a transit of the torus at speed 4
    Trajectory t = evolve_rk4(p.field, T, 1e-3, 1, Symbol::hilbert_deriv());
    REQUIRE(t.status == EvolveStatus::ok);
    SpectralField expect = translate(p.field, -p.speed * T);
    const double rel = sobolev_norm(t.final_state() - expect, 0.5) / sobolev_norm(p.field, 0.5);
    CHECK(rel < 1e-6);
    CHECK_FALSE(t.tail_warning);
}

TEST_CASE("F and E drift stay tiny; the mean is conserved to machine precision") {
    PeriodicGrid g(256, 4.0 * kPi);
    WaveProfile p = rbo_wave(4.0, 2.0 * kPi, g);
    Trajectory t = evolve_rk4(p.field, 2.0, 1e-3, 1, Symbol::hilbert_deriv());
    const StepDiagnostics& first = t.diagnostics.front();
    double worstF = 0.0, worstE = 0.0, worstG = 0.0;
    for (const StepDiagnostics& d : t.diagnostics) {
        worstF = std::max(worstF, std::abs(d.F - first.F) / std::abs(first.F));
        worstE = std::max(worstE, std::abs(d.E - first.E) / std::abs(first.E));
        worstG = std::max(worstG, std::abs(d.G - first.G));
    }
    CHECK(worstF < 2e-9);   // <= 1e-9 per unit time over T = 2
    CHECK(worstE < 2e-8);   // E tracks F within an order of magnitude
    CHECK(worstG < 1e-12);  // the multiplier vanishes at n = 0
}

TEST_CASE("RK4 observed order under dt halving") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u0 = field_from_function(g, [](double x) { return 0.5 * std::cos(x); });
    // steps large enough that the h^4 error sits far above the roundoff floor
    auto run = [&](double dt) {
        return evolve_rk4(u0, 2.0, dt, 1, Symbol::hilbert_deriv()).final_state();
    };
    const double e1 = l2_norm(run(4e-2) - run(2e-2));
    const double e2 = l2_norm(run(2e-2) - run(1e-2));
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.9);
    CHECK(order <= 4.3);
}

TEST_CASE("time reversibility of the flow") {
    PeriodicGrid g(128, 2.0 * kPi);
    SpectralField u0 = field_from_function(
        g, [](double x) { return 0.4 * std::cos(x) + 0.2 * std::sin(2.0 * x); });
    Trajectory fwd = evolve_rk4(u0, 1.0, 1e-3, 1, Symbol::hilbert_deriv());
    Trajectory back = evolve_rk4(fwd.final_state(), -1.0, -1e-3, 1, Symbol::hilbert_deriv());
    CHECK(sup_norm(back.final_state() - u0) < 1e-7);
}

TEST_CASE("linearized flow matches the semigroup multiplier") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u0 = field_from_function(
        g, [](double x) { return std::cos(x) - 0.3 * std::sin(3.0 * x); });
    const double T = 0.5;
    EvolveOptions opts;
    opts.nonlinear = false;
    Trajectory t = evolve_rk4(u0, T, 1e-3, 1, Symbol::hilbert_deriv(), opts);
    SpectralField exact = apply_symbol(u0, Symbol::semigroup(T));
    CHECK(sup_norm(t.final_state() - exact) < 1e-11);
}

TEST_CASE("non-finite states abort with the last valid state retained") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u0 = field_from_function(g, [](double x) { return 100.0 * std::cos(x); });
    Trajectory t = evolve_rk4(u0, 50.0, 1.0, 1, Symbol::hilbert_deriv());
    CHECK(t.status == EvolveStatus::aborted_nonfinite);
    CHECK_FALSE(t.message.empty());
    REQUIRE_FALSE(t.states.empty());
    for (const cplx& c : t.final_state().bins()) {
        CHECK(std::isfinite(c.real()));
        CHECK(std::isfinite(c.imag()));
    }
}

TEST_CASE("tail-energy warning on under-resolved data") {
    PeriodicGrid g(16, 2.0 * kPi);
    SpectralField u0 = field_from_function(
        g, [](double x) { return std::cos(x) + 0.1 * std::cos(7.0 * x); });
    Trajectory t = evolve_rk4(u0, 0.01, 1e-3, 1, Symbol::hilbert_deriv());
    CHECK(t.tail_warning);
}

TEST_CASE("evolve argument validation") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField u0 = field_from_function(g, [](double x) { return std::cos(x); });
    CHECK_THROWS_AS(evolve_rk4(u0, 1.0, -1e-3, 1, Symbol::hilbert_deriv()), precondition_error);
    CHECK_THROWS_AS(evolve_rk4(u0, 1.0, 0.3, 1, Symbol::hilbert_deriv()), precondition_error);
    CHECK(default_dt(u0) == Approx(std::min(1e-3, 0.2)).margin(1e-15));
}

// ---------------------------------------------------------------------------
// Picard
// ---------------------------------------------------------------------------

TEST_CASE("picard solver contracts on small data and matches RK4") {
    PeriodicGrid g(128, 2.0 * kPi);
    SpectralField shape = field_from_function(g, [](double x) { return std::cos(x); });
    SpectralField u0 = (0.1 / sobolev_norm(shape, 1.0)) * shape;
    REQUIRE(sobolev_norm(u0, 1.0) == Approx(0.1).epsilon(1e-12));

    PicardResult r = picard_solve(u0, 0.25);
    CHECK(r.converged);
    CHECK(r.T_guaranteed >= 0.25);
    REQUIRE(r.ratios.size() >= 3);
    for (std::size_t j = 2; j < r.ratios.size(); ++j) CHECK(r.ratios[j] <= 0.55);

    // fixed point against RK4 at the final node
    Trajectory t = evolve_rk4(u0, 0.25, 1e-4, 1, Symbol::hilbert_deriv());
    const double rel = sobolev_norm(r.fixed_point.back() - t.final_state(), 1.0) /
                       sobolev_norm(t.final_state(), 1.0);
    CHECK(rel < 1e-6);
}

TEST_CASE("picard fixed point of zero data is zero") {
    PeriodicGrid g(64, 2.0 * kPi);
    SpectralField zero(g);
    PicardResult r = picard_solve(zero, 0.4);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    for (const SpectralField& f : r.fixed_point) CHECK(sup_norm(f) == 0.0);
}

TEST_CASE("picard aborts beyond the guaranteed window") {
    PeriodicGrid g(128, 2.0 * kPi);
    SpectralField shape = field_from_function(g, [](double x) { return std::cos(x); });
    SpectralField u0 = (0.1 / sobolev_norm(shape, 1.0)) * shape;
    const double window = picard_solve(u0, 0.01).T_guaranteed;
    CHECK_THROWS_AS(picard_solve(u0, 2.0 * window), precondition_error);
}
