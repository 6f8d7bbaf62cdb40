#pragma once

#include <stdexcept>
#include <string>

namespace rbo {

/// Violated argument/domain contract (rejected before any computation).
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced an invalid or non-converged result.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Two operands live on different grids.
class grid_mismatch_error : public precondition_error {
public:
    explicit grid_mismatch_error(const std::string& what) : precondition_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw precondition_error(msg);
}

}  // namespace rbo
