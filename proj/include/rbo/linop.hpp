#pragma once

// Truncated matrices for the linearized operators
//     L = c H d/dx + (c-1) - phi_c        (rBO)
//     L = c H + (c-1) - phi_c^p           (generalized family)
// in the real orthonormal basis {1/sqrt(P), sqrt(2/P) cos(xi_m x),
// sqrt(2/P) sin(xi_m x)}, where the operator is real symmetric and block
// diagonal (cos block | sin block). Multiplication by phi^p becomes the
// Toeplitz-plus-Hankel combination of its Fourier coefficients.
//
// Also: spectral reports, the discrete PF(2) class check, constrained
// quadratic-form minimization (Lemma-7.1 style), and the stability index
// I = -dF/dc.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rbo/spectral.hpp"
#include "rbo/waves.hpp"

namespace rbo {

struct OperatorMatrix {
    Eigen::MatrixXd A;       // (2M+1) x (2M+1), basis [e0, c_1..c_M, s_1..s_M]
    int M = 0;
    double c = 0.0;
    PeriodicGrid grid;      // grid of the underlying profile
    std::vector<double> potential;  // (phi^p)_hat(j), j = 0..2M
    Eigen::VectorXd phi_prime;      // phi' expanded in the basis
    double sup_potential = 0.0;     // max_x |phi^p|

    int dim() const { return 2 * M + 1; }
};

// ---------------------------------------------------------------------------
// basis expansion
// ---------------------------------------------------------------------------

/// Coordinates of a field in the real orthonormal basis, truncated to M.
inline Eigen::VectorXd field_to_basis(const SpectralField& f, int M) {
    const double P = f.grid().period();
    Eigen::VectorXd v(2 * M + 1);
    v(0) = std::sqrt(P) * f.coeff(0).real();
    for (int m = 1; m <= M; ++m) {
        v(m) = std::sqrt(2.0 * P) * f.coeff(m).real();
        v(M + m) = -std::sqrt(2.0 * P) * f.coeff(m).imag();
    }
    return v;
}

inline SpectralField basis_to_field(const PeriodicGrid& g, const Eigen::VectorXd& v, int M) {
    const double P = g.period();
    SpectralField f(g);
    f.set_coeff(0, cplx(v(0) / std::sqrt(P), 0.0));
    for (int m = 1; m <= M; ++m) {
        const cplx c(v(m) / std::sqrt(2.0 * P), -v(M + m) / std::sqrt(2.0 * P));
        f.set_coeff(m, c);
        f.set_coeff(-m, std::conj(c));
    }
    return f;
}

// ---------------------------------------------------------------------------
// assembly
// ---------------------------------------------------------------------------

inline OperatorMatrix assemble_operator(const SpectralField& phi, double c,
                                        const Symbol& alpha, int p, int M) {
    require(alpha.real_even(), "assemble: the dispersive symbol must be real and even, got '" +
                                   alpha.name() + "'");
    require(p >= 1, "assemble: p >= 1");
    require(M >= 1, "assemble: M >= 1");
    const PeriodicGrid& g = phi.grid();
    require(M <= g.num_points() / 4,
            "assemble: M <= N/4 required so the coefficients of phi^p up to 2M are unaliased");

    SpectralField phip = field_pow(phi, p);
    std::vector<double> v(static_cast<std::size_t>(2 * M + 1));
    for (int j = 0; j <= 2 * M; ++j) v[static_cast<std::size_t>(j)] = phip.coeff(j).real();

    OperatorMatrix op{Eigen::MatrixXd::Zero(2 * M + 1, 2 * M + 1), M, c, g, v,
                      Eigen::VectorXd::Zero(2 * M + 1), sup_norm(phip)};

    auto diag = [&](int m) { return c * alpha.eval(g.xi(m), m).real() + c - 1.0; };

    // cos block (indices 0..M)
    op.A(0, 0) = diag(0) - v[0];
    for (int j = 1; j <= M; ++j) {
        op.A(0, j) = op.A(j, 0) = -std::sqrt(2.0) * v[static_cast<std::size_t>(j)];
    }
    for (int i = 1; i <= M; ++i)
        for (int j = 1; j <= M; ++j) {
            double a = -(v[static_cast<std::size_t>(std::abs(i - j))] + v[static_cast<std::size_t>(i + j)]);
            if (i == j) a += diag(i);
            op.A(i, j) = a;
        }
    // sin block (indices M+1..2M)
    for (int i = 1; i <= M; ++i)
        for (int j = 1; j <= M; ++j) {
            double a = -(v[static_cast<std::size_t>(std::abs(i - j))] - v[static_cast<std::size_t>(i + j)]);
            if (i == j) a += diag(i);
            op.A(M + i, M + j) = a;
        }

    op.phi_prime = field_to_basis(apply_symbol(phi, Symbol::deriv()), M);
    return op;
}

inline OperatorMatrix assemble(const WaveProfile& profile, const Symbol& alpha, int p, int M) {
    return assemble_operator(profile.field, profile.speed, alpha, p, M);
}

/// Row-wise Gershgorin lower bounds diag - sum |offdiag|.
inline std::vector<double> gershgorin_lower_bounds(const OperatorMatrix& op) {
    std::vector<double> out(static_cast<std::size_t>(op.dim()));
    for (int i = 0; i < op.dim(); ++i) {
        double radius = 0.0;
        for (int j = 0; j < op.dim(); ++j)
            if (j != i) radius += std::abs(op.A(i, j));
        out[static_cast<std::size_t>(i)] = op.A(i, i) - radius;
    }
    return out;
}

/// Certifies that every row whose diagonal exceeds 2 sup|phi^p| has a
/// Gershgorin disc strictly right of zero, so truncation adds no spurious
/// negative eigenvalues from the tail.
inline bool gershgorin_tail_certificate(const OperatorMatrix& op) {
    const std::vector<double> lo = gershgorin_lower_bounds(op);
    for (int i = 0; i < op.dim(); ++i)
        if (op.A(i, i) > 2.0 * op.sup_potential && lo[static_cast<std::size_t>(i)] <= 0.0)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// eigen reports
// ---------------------------------------------------------------------------

struct EigenReport {
    std::vector<double> eigenvalues;  // ascending
    double norm_A = 0.0;              // spectral norm
    double gap_threshold = 0.0;       // g in the simple-zero certificate
    int count_negative = 0;           // eigenvalues < -g
    int zero_count = 0;               // eigenvalues inside (-g, g)
    double zero_value = 0.0;
    double zero_gap = 0.0;            // distance from the zero mode to its neighbors
    double lambda2 = 0.0;             // smallest eigenvalue above the zero window
    double alignment_phi_prime = 0.0; // |cos angle| of the zero mode with phi'
    double max_residual = 0.0;        // max ||A v - lambda v|| over the lowest pairs
    Eigen::MatrixXd lowest_vectors;   // three columns
};

inline EigenReport eigen_report(const OperatorMatrix& op) {
    const double asym = (op.A - op.A.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw precondition_error("eigen_report: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.A);
    if (es.info() != Eigen::Success) throw numerical_error("eigen_report: eigensolver failed");

    EigenReport r;
    const Eigen::VectorXd& ev = es.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    r.norm_A = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));

    const int n_low = std::min<int>(3, op.dim());
    r.lowest_vectors = es.eigenvectors().leftCols(n_low);
    for (int i = 0; i < n_low; ++i) {
        const double res = (op.A * r.lowest_vectors.col(i) - ev(i) * r.lowest_vectors.col(i)).norm();
        r.max_residual = std::max(r.max_residual, res);
    }

    r.gap_threshold = std::max(1e-7 * r.norm_A, 10.0 * r.max_residual);
    int zero_idx = -1;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -r.gap_threshold) ++r.count_negative;
        if (std::abs(ev(i)) <= r.gap_threshold) {
            ++r.zero_count;
            zero_idx = i;
            r.zero_value = ev(i);
        }
    }
    if (zero_idx >= 0) {
        double gap = std::numeric_limits<double>::infinity();
        if (zero_idx > 0) gap = std::min(gap, ev(zero_idx) - ev(zero_idx - 1));
        if (zero_idx + 1 < ev.size()) gap = std::min(gap, ev(zero_idx + 1) - ev(zero_idx));
        r.zero_gap = gap;
        const Eigen::VectorXd vz = es.eigenvectors().col(zero_idx);
        const double denom = vz.norm() * op.phi_prime.norm();
        r.alignment_phi_prime = denom > 0.0 ? std::abs(vz.dot(op.phi_prime)) / denom : 0.0;
    }
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > r.gap_threshold) {
            r.lambda2 = ev(i);
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// discrete PF(2)
// ---------------------------------------------------------------------------

struct Pf2Witness {
    int n1 = 0, n2 = 0, m1 = 0, m2 = 0;
    double det = 0.0;
    bool strict_case = false;  // the overlap configuration requiring det > 0
};

struct Pf2Result {
    bool pass = false;
    std::string reason;
    bool has_witness = false;
    Pf2Witness witness;
};

namespace detail {

// checks one translation-reduced configuration (A = n1-m1, s = n2-n1, t = m2-m1)
inline bool pf2_config_ok(const std::function<double(int)>& a, int A, int s, int t,
                          Pf2Result& result) {
    const double d1 = a(A) * a(A + s - t);
    const double d2 = a(A - t) * a(A + s);
    const double det = d1 - d2;
    const double scale = std::abs(d1) + std::abs(d2);
    const double tol = 1e-12 * scale;
    const bool strict = (A + s > 0) && (A - t < 0);  // n2 > m1 and n1 < m2
    const bool ok = strict ? det > tol : det >= -tol;
    if (!ok) {
        result.pass = false;
        result.reason = strict ? "strict inequality (ii') fails in the overlap case"
                               : "weak inequality (ii') fails";
        result.has_witness = true;
        result.witness = {A, A + s, 0, t, det, strict};
    }
    return ok;
}

}  // namespace detail

/// (ii') via the translation-reduced 3-index form, O(M^3). `vals` holds the
/// even sequence on n = 0..M.
inline Pf2Result pf2_check_normal_form(const std::vector<double>& vals) {
    const int M = static_cast<int>(vals.size()) - 1;
    require(M >= 1, "pf2: need at least two sequence values");
    auto a = [&](int n) { return vals[static_cast<std::size_t>(std::abs(n))]; };

    Pf2Result r;
    r.pass = true;
    for (int n = 0; n <= M; ++n)
        if (!(vals[static_cast<std::size_t>(n)] > 0.0)) {
            r.pass = false;
            r.reason = "condition (i): non-positive entry";
            r.has_witness = true;
            r.witness = {n, 0, 0, 0, vals[static_cast<std::size_t>(n)], false};
            return r;
        }

    for (int A = -M; A <= M; ++A)
        for (int s = 1; A + s <= M; ++s)
            for (int t = 1; A - t >= -M; ++t) {
                if (A + s - t < -M || A + s - t > M) continue;
                if (!detail::pf2_config_ok(a, A, s, t, r)) return r;
            }
    return r;
}

/// Full quadruple scan over n1 < n2, m1 < m2 with all four differences inside
/// the window; the brute-force oracle used for M <= 24.
inline Pf2Result pf2_check_quadruples(const std::vector<double>& vals) {
    const int M = static_cast<int>(vals.size()) - 1;
    require(M >= 1, "pf2: need at least two sequence values");
    auto a = [&](int n) { return vals[static_cast<std::size_t>(std::abs(n))]; };

    Pf2Result r;
    r.pass = true;
    for (int n = 0; n <= M; ++n)
        if (!(vals[static_cast<std::size_t>(n)] > 0.0)) {
            r.pass = false;
            r.reason = "condition (i): non-positive entry";
            r.has_witness = true;
            r.witness = {n, 0, 0, 0, vals[static_cast<std::size_t>(n)], false};
            return r;
        }

    auto inside = [M](int d) { return d >= -M && d <= M; };
    for (int n1 = -M; n1 <= M; ++n1)
        for (int n2 = n1 + 1; n2 <= M; ++n2)
            for (int m1 = -M; m1 <= M; ++m1)
                for (int m2 = m1 + 1; m2 <= M; ++m2) {
                    if (!inside(n1 - m1) || !inside(n2 - m2) || !inside(n1 - m2) ||
                        !inside(n2 - m1))
                        continue;
                    const double d1 = a(n1 - m1) * a(n2 - m2);
                    const double d2 = a(n1 - m2) * a(n2 - m1);
                    const double det = d1 - d2;
                    const double tol = 1e-12 * (std::abs(d1) + std::abs(d2));
                    const bool strict = (n2 > m1) && (n1 < m2);
                    const bool ok = strict ? det > tol : det >= -tol;
                    if (!ok) {
                        r.pass = false;
                        r.reason = strict ? "strict inequality (ii') fails in the overlap case"
                                          : "weak inequality (ii') fails";
                        r.has_witness = true;
                        r.witness = {n1, n2, m1, m2, det, strict};
                        return r;
                    }
                }
    return r;
}

inline Pf2Result pf2_check(const std::vector<double>& vals) {
    const int M = static_cast<int>(vals.size()) - 1;
    return M <= 24 ? pf2_check_quadruples(vals) : pf2_check_normal_form(vals);
}

/// The Fourier coefficients of the BBM cnoidal wave as a PF(2) candidate.
inline std::vector<double> bbm_pf2_sequence(double L, double k, int M) {
    const double c = bbm_speed(L, k).c_plus;
    const EllipticParams el = complete_elliptic(k);
    // mean = c * a_tilde(k)
    const double k2 = k * k;
    const double mean = c * (16.0 * el.K * el.K / (L * L)) *
                        (3.0 * el.E / el.K - 2.0 + k2 + std::sqrt(1.0 - k2 + k2 * k2));
    std::vector<double> vals(static_cast<std::size_t>(M + 1));
    for (int n = 0; n <= M; ++n) vals[static_cast<std::size_t>(n)] = bbm_coeff(c, L, el, mean, n);
    return vals;
}

// ---------------------------------------------------------------------------
// constrained minimization (Lemma 7.1)
// ---------------------------------------------------------------------------

namespace detail {

// Modified Gram-Schmidt with one reorthogonalization pass; throws on rank loss.
inline Eigen::MatrixXd orthonormalize(const std::vector<Eigen::VectorXd>& constraints,
                                      int dim) {
    Eigen::MatrixXd U(dim, static_cast<int>(constraints.size()));
    int r = 0;
    for (const Eigen::VectorXd& c : constraints) {
        require(c.size() == dim, "constrained_min: constraint dimension mismatch");
        Eigen::VectorXd v = c;
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < r; ++j) v -= U.col(j).dot(v) * U.col(j);
        if (v.norm() <= 1e-12 * c.norm())
            throw precondition_error("constrained_min: degenerate constraint set (rank loss)");
        U.col(r++) = v / v.norm();
    }
    return U.leftCols(r);
}

// Orthonormal basis of the orthogonal complement of span(U).
inline Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& U, int dim) {
    if (U.cols() == 0) return Eigen::MatrixXd::Identity(dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
    const Eigen::MatrixXd Q = qr.householderQ();
    return Q.rightCols(dim - U.cols());
}

}  // namespace detail

/// min (A f, f) over unit f orthogonal to the given constraint vectors.
inline double constrained_min(const OperatorMatrix& op,
                              const std::vector<Eigen::VectorXd>& constraints) {
    const Eigen::MatrixXd U = detail::orthonormalize(constraints, op.dim());
    const Eigen::MatrixXd Q = detail::complement_basis(U, op.dim());
    const Eigen::MatrixXd T = Q.transpose() * op.A * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()));
    if (es.info() != Eigen::Success) throw numerical_error("constrained_min: eigensolver failed");
    return es.eigenvalues()(0);
}

/// Estimated coercivity constant: min of (A f, f) / ||f||_{H^{1/2}}^2 over the
/// constrained complement (a reported lower bound, not an exact constant).
inline double coercivity_estimate(const OperatorMatrix& op,
                                  const std::vector<Eigen::VectorXd>& constraints) {
    const Eigen::MatrixXd U = detail::orthonormalize(constraints, op.dim());
    const Eigen::MatrixXd Q = detail::complement_basis(U, op.dim());
    Eigen::VectorXd w(op.dim());
    w(0) = 1.0;
    for (int m = 1; m <= op.M; ++m) {
        const double wm = std::sqrt(1.0 + static_cast<double>(m) * m);
        w(m) = wm;
        w(op.M + m) = wm;
    }
    const Eigen::MatrixXd T = Q.transpose() * op.A * Q;
    const Eigen::MatrixXd W = Q.transpose() * w.asDiagonal() * Q;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (T + T.transpose()), 0.5 * (W + W.transpose()));
    if (es.info() != Eigen::Success)
        throw numerical_error("coercivity_estimate: generalized eigensolver failed");
    return es.eigenvalues()(0);
}

// ---------------------------------------------------------------------------
// stability index
// ---------------------------------------------------------------------------

struct StabilityIndex {
    double I = 0.0;      // (chi, phi + H phi) = -dF/dc
    double dF_dc = 0.0;  // Richardson-extrapolated central difference
};

/// I and dF/dc for a wave family c -> phi_c (Richardson over steps h, h/2).
inline StabilityIndex stability_index(const std::function<WaveProfile(double)>& family,
                                      double c, double h, const Symbol& alpha) {
    auto central = [&](double step) {
        return (functional_F(family(c + step).field, alpha) -
                functional_F(family(c - step).field, alpha)) /
               (2.0 * step);
    };
    const double d1 = central(h);
    const double d2 = central(0.5 * h);
    StabilityIndex s;
    s.dF_dc = (4.0 * d2 - d1) / 3.0;
    s.I = -s.dF_dc;
    return s;
}

/// Closed-form (chi, phi + H phi') for the rBO family via geometric series in
/// e^{-2 eta} differentiated with d eta / dc.
inline double rbo_stability_index_analytic(double c, double L) {
    const double eta = rbo_eta(c, L);
    const double detadc = rbo_deta_dc(c, L);
    const double q = std::exp(-2.0 * eta);
    const double dqdc = -2.0 * q * detadc;
    const double coth = 1.0 / std::tanh(eta);
    const double dcoth = -detadc / (std::sinh(eta) * std::sinh(eta));
    const double geom = q / ((1.0 - q) * (1.0 - q));
    const double dgeom = (1.0 + q) / std::pow(1.0 - q, 3) * dqdc;
    const double pref = 4.0 * kPi * kPi / L;
    // F(c) = pref c^2 [coth(eta) + (2 pi / L) q/(1-q)^2]
    const double dFdc = pref * (2.0 * c * (coth + 2.0 * kPi / L * geom) +
                                c * c * (dcoth + 2.0 * kPi / L * dgeom));
    return -dFdc;
}

}  // namespace rbo
