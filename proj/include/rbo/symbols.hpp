#pragma once

// Fourier multipliers used throughout: the Hilbert transform -i*sgn(n),
// |xi| (= H d/dx), xi^2 (= -d^2/dx^2), Bessel weights, the rBO multiplier
// -i*xi/(1+|xi|), its semigroup phase, and plain/half derivatives.
//
// Real symbols here are even in n; purely imaginary ones are odd. Weights
// written in terms of the integer mode index (bessel, lambda_smooth) follow
// the integer-index norm convention; the rest use the physical frequency.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>

#include "rbo/errors.hpp"

namespace rbo {

class Symbol {
public:
    enum class Kind {
        hilbert,           // -i sgn(n), sgn(0) = 0
        hilbert_deriv,     // |xi|
        neg_second_deriv,  // xi^2
        bessel,            // (1 + n^2)^{s/2}
        lambda_smooth,     // (1 + |n|)^{-1}
        k_rbo,             // -i xi / (1 + |xi|)
        semigroup,         // exp(-i t xi / (1 + |xi|))
        deriv,             // i xi
        half_deriv,        // |xi|^{1/2}
        custom,
    };

    enum class Parity { real_even, imag_odd, general };

    using EvalFn = std::function<std::complex<double>(double xi, int n)>;

    static Symbol hilbert() { return Symbol(Kind::hilbert, Parity::imag_odd, "hilbert"); }
    static Symbol hilbert_deriv() {
        return Symbol(Kind::hilbert_deriv, Parity::real_even, "hilbert_deriv");
    }
    static Symbol neg_second_deriv() {
        return Symbol(Kind::neg_second_deriv, Parity::real_even, "neg_second_deriv");
    }
    static Symbol bessel(double s) {
        Symbol sym(Kind::bessel, Parity::real_even, "bessel");
        sym.param_ = s;
        return sym;
    }
    static Symbol lambda_smooth() {
        return Symbol(Kind::lambda_smooth, Parity::real_even, "lambda_smooth");
    }
    static Symbol k_rbo() { return Symbol(Kind::k_rbo, Parity::imag_odd, "k_rbo"); }
    static Symbol semigroup(double t) {
        Symbol sym(Kind::semigroup, Parity::general, "semigroup");
        sym.param_ = t;
        return sym;
    }
    static Symbol deriv() { return Symbol(Kind::deriv, Parity::imag_odd, "deriv"); }
    static Symbol half_deriv() { return Symbol(Kind::half_deriv, Parity::real_even, "half_deriv"); }
    static Symbol custom(EvalFn fn, Parity parity, std::string name = "custom") {
        Symbol sym(Kind::custom, parity, std::move(name));
        sym.fn_ = std::move(fn);
        return sym;
    }

    std::complex<double> eval(double xi, int n) const {
        using cplx = std::complex<double>;
        switch (kind_) {
            case Kind::hilbert: {
                const double s = n > 0 ? 1.0 : (n < 0 ? -1.0 : 0.0);
                return cplx(0.0, -s);
            }
            case Kind::hilbert_deriv:
                return cplx(std::abs(xi), 0.0);
            case Kind::neg_second_deriv:
                return cplx(xi * xi, 0.0);
            case Kind::bessel:
                return cplx(std::pow(1.0 + static_cast<double>(n) * n, 0.5 * param_), 0.0);
            case Kind::lambda_smooth:
                return cplx(1.0 / (1.0 + std::abs(n)), 0.0);
            case Kind::k_rbo:
                return cplx(0.0, -xi / (1.0 + std::abs(xi)));
            case Kind::semigroup:
                return std::polar(1.0, -param_ * xi / (1.0 + std::abs(xi)));
            case Kind::deriv:
                return cplx(0.0, xi);
            case Kind::half_deriv:
                return cplx(std::sqrt(std::abs(xi)), 0.0);
            case Kind::custom:
                return fn_(xi, n);
        }
        throw numerical_error("symbol: unreachable kind");
    }

    Kind kind() const { return kind_; }
    Parity parity() const { return parity_; }
    double param() const { return param_; }
    const std::string& name() const { return name_; }
    bool real_even() const { return parity_ == Parity::real_even; }

private:
    Symbol(Kind kind, Parity parity, std::string name)
        : kind_(kind), parity_(parity), name_(std::move(name)) {}

    Kind kind_;
    Parity parity_;
    std::string name_;
    double param_ = 0.0;
    EvalFn fn_;
};

}  // namespace rbo
