#pragma once

// Uniform periodic grid on [-P/2, P/2). Mode indices run over
// {-N/2+1, ..., N/2}; the physical frequency of mode n is xi_n = 2*pi*n/P.

#include <cmath>
#include <string>

#include "rbo/errors.hpp"

namespace rbo {

constexpr double kPi = 3.141592653589793238462643383279502884;

class PeriodicGrid {
public:
    PeriodicGrid(int num_points, double period)
        : num_points_(num_points), period_(period) {
        require(num_points >= 8, "grid: need N >= 8, got N=" + std::to_string(num_points));
        require(num_points % 2 == 0, "grid: N must be even, got N=" + std::to_string(num_points));
        require(period > 0.0, "grid: period must be positive");
    }

    int num_points() const { return num_points_; }
    double period() const { return period_; }

    /// Sample point x_j = -P/2 + j*P/N, j = 0..N-1.
    double x(int j) const {
        return -0.5 * period_ + static_cast<double>(j) * period_ / num_points_;
    }

    int mode_min() const { return -num_points_ / 2 + 1; }
    int mode_max() const { return num_points_ / 2; }

    /// Physical frequency of mode n (radians per length).
    double xi(int n) const { return 2.0 * kPi * static_cast<double>(n) / period_; }

    /// FFT bin holding mode n.
    int bin_of_mode(int n) const { return n >= 0 ? n : n + num_points_; }
    int mode_of_bin(int j) const { return j <= num_points_ / 2 ? j : j - num_points_; }

    bool operator==(const PeriodicGrid& o) const {
        return num_points_ == o.num_points_ && period_ == o.period_;
    }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

private:
    int num_points_;
    double period_;
};

}  // namespace rbo
