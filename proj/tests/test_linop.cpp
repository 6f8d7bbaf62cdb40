// =============================================================================
// Linearized operators: assembly, spectra, PF(2), constrained minimization,
// stability index. Oracles: free/constant-potential operators with known
// spectra, the brute-force PF(2) quadruple scan, analytic geometric series.
// =============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rbo/linop.hpp"

using namespace rbo;
using Catch::Approx;

namespace {

WaveProfile rbo_reference(int n_pts = 512) {
    PeriodicGrid g(n_pts, 4.0 * kPi);
    return rbo_wave(4.0, 2.0 * kPi, g);
}

}  // namespace

TEST_CASE("basis expansion round trip") {
    PeriodicGrid g(64, 3.0);
    SpectralField f = field_from_function(
        g, [](double x) { return 1.3 + std::cos(2.0 * kPi * x / 3.0) - 0.4 * std::sin(4.0 * kPi * x / 3.0); });
    const int M = 8;
    Eigen::VectorXd v = field_to_basis(f, M);
    SpectralField back = basis_to_field(g, v, M);
    CHECK(sup_norm(back - f) < 1e-12);
    // the expansion is isometric: |v|^2 = L2 norm^2 for band-limited fields
    CHECK(v.squaredNorm() == Approx(std::pow(l2_norm(f), 2)).epsilon(1e-12));
}

TEST_CASE("free operator is diagonal with the multiplier entries") {
    PeriodicGrid g(128, 4.0 * kPi);
    SpectralField zero(g);
    const double c = 4.0;
    OperatorMatrix op = assemble_operator(zero, c, Symbol::hilbert_deriv(), 1, 16);
    for (int i = 0; i < op.dim(); ++i)
        for (int j = 0; j < op.dim(); ++j) {
            if (i == j) continue;
            CHECK(op.A(i, j) == 0.0);
        }
    CHECK(op.A(0, 0) == Approx(c - 1.0));
    CHECK(op.A(1, 1) == Approx(c * g.xi(1) + c - 1.0));
    CHECK(op.A(op.M + 1, op.M + 1) == Approx(c * g.xi(1) + c - 1.0));

    EigenReport r = eigen_report(op);
    CHECK(r.count_negative == 0);
    CHECK(r.zero_count == 0);
}

TEST_CASE("constant potential shifts the spectrum exactly") {
    PeriodicGrid g(128, 4.0 * kPi);
    const double kappa = 0.7;
    SpectralField zero(g);
    SpectralField constf = field_from_function(g, [kappa](double) { return kappa; });
    OperatorMatrix free_op = assemble_operator(zero, 4.0, Symbol::hilbert_deriv(), 1, 12);
    OperatorMatrix shifted = assemble_operator(constf, 4.0, Symbol::hilbert_deriv(), 1, 12);
    EigenReport rf = eigen_report(free_op);
    EigenReport rs = eigen_report(shifted);
    for (std::size_t i = 0; i < rf.eigenvalues.size(); ++i)
        CHECK(rs.eigenvalues[i] == Approx(rf.eigenvalues[i] - kappa).margin(1e-12));
}

TEST_CASE("assembly preconditions") {
    WaveProfile p = rbo_reference(128);
    CHECK_THROWS_AS(assemble(p, Symbol::hilbert(), 1, 16), precondition_error);  // odd symbol
    CHECK_THROWS_AS(assemble(p, Symbol::hilbert_deriv(), 1, 64), precondition_error);  // M > N/4
    CHECK_NOTHROW(assemble(p, Symbol::hilbert_deriv(), 1, 32));
}

TEST_CASE("phi' is annihilated by the assembled rBO operator") {
    WaveProfile p = rbo_reference();
    OperatorMatrix op = assemble(p, Symbol::hilbert_deriv(), 1, 64);
    const double rel = (op.A * op.phi_prime).norm() / (op.A.norm() * op.phi_prime.norm());
    CHECK(rel < 1e-8);
}

TEST_CASE("rBO spectral structure: one negative, simple zero aligned with phi'") {
    WaveProfile p = rbo_reference();
    double lambda2_prev = 0.0;
    for (int M : {48, 96}) {
        OperatorMatrix op = assemble(p, Symbol::hilbert_deriv(), 1, M);
        EigenReport r = eigen_report(op);
        CHECK(r.count_negative == 1);
        CHECK(r.zero_count == 1);
        CHECK(std::abs(r.zero_value) < 1e-7 * r.norm_A);
        CHECK(r.alignment_phi_prime > 1.0 - 1e-6);
        CHECK(r.lambda2 > 0.0);
        CHECK(r.max_residual < 1e-9 * r.norm_A);
        if (lambda2_prev != 0.0) CHECK(r.lambda2 == Approx(lambda2_prev).epsilon(1e-3));
        lambda2_prev = r.lambda2;

        CHECK(gershgorin_tail_certificate(op));
    }
}

TEST_CASE("BBM plus-branch spectral structure") {
    PeriodicGrid g(512, 8.0);
    WaveProfile p = bbm_cnoidal(8.0, 0.5, g);
    OperatorMatrix op = assemble(p, Symbol::neg_second_deriv(), 1, 64);

    const double rel = (op.A * op.phi_prime).norm() / (op.A.norm() * op.phi_prime.norm());
    CHECK(rel < 1e-8);

    EigenReport r = eigen_report(op);
    CHECK(r.count_negative == 1);
    CHECK(r.zero_count == 1);
    CHECK(r.alignment_phi_prime > 1.0 - 1e-6);
    CHECK(r.lambda2 > 0.0);
    CHECK(gershgorin_tail_certificate(op));
}

// ---------------------------------------------------------------------------
// PF(2)
// ---------------------------------------------------------------------------

TEST_CASE("pf2: geometric families pass, 1+|n| fails, positivity enforced") {
    for (double eta : {0.3, 0.8, 2.0}) {
        std::vector<double> vals(17);
        for (int n = 0; n <= 16; ++n) vals[static_cast<std::size_t>(n)] = std::exp(-eta * n);
        Pf2Result r = pf2_check(vals);
        CHECK(r.pass);
    }

    std::vector<double> linear(9);
    for (int n = 0; n <= 8; ++n) linear[static_cast<std::size_t>(n)] = 1.0 + n;
    Pf2Result bad = pf2_check(linear);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.has_witness);
    // replay the witness quadruple
    auto a = [&](int n) { return linear[static_cast<std::size_t>(std::abs(n))]; };
    const Pf2Witness& w = bad.witness;
    CHECK(a(w.n1 - w.m1) * a(w.n2 - w.m2) - a(w.n1 - w.m2) * a(w.n2 - w.m1) <= 0.0);

    std::vector<double> nonpos = {1.0, 0.5, 0.0, 0.2};
    Pf2Result zero = pf2_check(nonpos);
    CHECK_FALSE(zero.pass);
    CHECK(zero.reason.find("(i)") != std::string::npos);
}

TEST_CASE("pf2: BBM coefficient sequence qualifies") {
    for (double k : {0.2, 0.5}) {
        std::vector<double> vals = bbm_pf2_sequence(8.0, k, 16);
        for (double v : vals) CHECK(v > 0.0);
        CHECK(pf2_check(vals).pass);
    }
}

TEST_CASE("pf2: quadruple scan and normal form agree (oracle equivalence)") {
    for (int M = 2; M <= 16; M += 2) {
        std::vector<double> geo(static_cast<std::size_t>(M + 1));
        for (int n = 0; n <= M; ++n) geo[static_cast<std::size_t>(n)] = std::exp(-0.8 * n);
        CHECK(pf2_check_quadruples(geo).pass == pf2_check_normal_form(geo).pass);

        std::vector<double> lin(static_cast<std::size_t>(M + 1));
        for (int n = 0; n <= M; ++n) lin[static_cast<std::size_t>(n)] = 1.0 + n;
        CHECK(pf2_check_quadruples(lin).pass == pf2_check_normal_form(lin).pass);

        // gaussian e^{-n^2/M} is log-concave, passes; its reciprocal fails
        std::vector<double> gauss(static_cast<std::size_t>(M + 1));
        for (int n = 0; n <= M; ++n) gauss[static_cast<std::size_t>(n)] = std::exp(-static_cast<double>(n) * n / M);
        CHECK(pf2_check_quadruples(gauss).pass == pf2_check_normal_form(gauss).pass);
        std::vector<double> inv(static_cast<std::size_t>(M + 1));
        for (int n = 0; n <= M; ++n) inv[static_cast<std::size_t>(n)] = 1.0 / gauss[static_cast<std::size_t>(n)];
        CHECK(pf2_check_quadruples(inv).pass == pf2_check_normal_form(inv).pass);
    }
}

// ---------------------------------------------------------------------------
// Lemma 7.1 minimizations
// ---------------------------------------------------------------------------

TEST_CASE("constrained minimum: alpha = 0 and beta > 0") {
    WaveProfile p = rbo_reference();
    const int M = 96;
    OperatorMatrix op = assemble(p, Symbol::hilbert_deriv(), 1, M);
    EigenReport r = eigen_report(op);

    // no constraints: the unconstrained minimum is the lowest eigenvalue
    CHECK(constrained_min(op, {}) == Approx(r.eigenvalues.front()).margin(1e-10));

    SpectralField phi_plus = p.field + apply_symbol(p.field, Symbol::hilbert_deriv());
    Eigen::VectorXd c1 = field_to_basis(phi_plus, M);
    const double alpha = constrained_min(op, {c1});
    CHECK(std::abs(alpha) < 1e-6 * r.norm_A);

    SpectralField phiphip = field_product(p.field, apply_symbol(p.field, Symbol::deriv()));
    Eigen::VectorXd c2 = field_to_basis(phiphip, M);
    const double beta = constrained_min(op, {c1, c2});
    CHECK(beta > 0.0);
    CHECK(beta > std::abs(alpha));

    // the constrained minimum's sign is scale invariant in the constraints
    const double beta_scaled = constrained_min(op, {10.0 * c1, 0.1 * c2});
    CHECK(beta_scaled == Approx(beta).epsilon(1e-10));

    // coercivity with the H^{1/2} weight stays positive with both constraints
    const double beta0 = coercivity_estimate(op, {c1, c2});
    CHECK(beta0 > 0.0);

    CHECK_THROWS_AS(constrained_min(op, {c1, 2.0 * c1}), precondition_error);
}

TEST_CASE("operator identity L(chi) = phi + H phi' in matrix form") {
    const double c = 4.0, L = 2.0 * kPi;
    WaveProfile p = rbo_reference();
    const int M = 96;
    OperatorMatrix op = assemble(p, Symbol::hilbert_deriv(), 1, M);
    SpectralField chi = rbo_dwave_dc(c, L, p.grid);
    SpectralField rhs = p.field + apply_symbol(p.field, Symbol::hilbert_deriv());
    Eigen::VectorXd chi_v = field_to_basis(chi, M);
    Eigen::VectorXd rhs_v = field_to_basis(rhs, M);
    CHECK((op.A * chi_v - rhs_v).norm() < 1e-8 * rhs_v.norm());
}

TEST_CASE("stability index: finite differences match the geometric-series value") {
    const double c = 4.0, L = 2.0 * kPi;
    PeriodicGrid g(256, 2.0 * L);
    auto family = [&](double speed) { return rbo_wave(speed, L, g); };

    StabilityIndex s = stability_index(family, c, 1e-3, Symbol::hilbert_deriv());
    CHECK(s.I < 0.0);
    CHECK(s.dF_dc > 0.0);  // condition (C3)

    const double analytic = rbo_stability_index_analytic(c, L);
    CHECK(s.I == Approx(analytic).epsilon(1e-6));

    // the chi route: I = (chi, phi + H phi') with the analytic chi
    WaveProfile p = family(c);
    SpectralField chi = rbo_dwave_dc(c, L, g);
    SpectralField phi_plus = p.field + apply_symbol(p.field, Symbol::hilbert_deriv());
    CHECK(inner_product(chi, phi_plus) == Approx(analytic).epsilon(1e-9));
}

TEST_CASE("stability index for the BBM family is negative") {
    const double L = 8.0;
    PeriodicGrid g(256, L);
    auto family = [&](double speed) { return bbm_wave_at_speed(L, speed, g); };
    const double c = bbm_speed(L, 0.5).c_plus;
    StabilityIndex s = stability_index(family, c, 1e-4, Symbol::neg_second_deriv());
    CHECK(s.I < 0.0);

    // consistency with the finite-difference chi pairing
    const double h = 1e-4;
    SpectralField chi = (-1.0 / (2.0 * h)) * (family(c + h).field - family(c - h).field);
    WaveProfile p = family(c);
    SpectralField rhs = p.field + apply_symbol(p.field, Symbol::neg_second_deriv());
    CHECK(inner_product(chi, rhs) == Approx(s.I).epsilon(1e-5));
}
