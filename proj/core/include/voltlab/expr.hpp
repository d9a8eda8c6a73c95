#pragma once

#include <string>

#include "voltlab/grid.hpp"

namespace voltlab {

/// Evaluate an arithmetic expression in the variable x.
/// Grammar: decimal literals, `x`, `pi`, binary + - * / ^ (^ binds tightest,
/// right-associative), unary minus, parentheses, and the functions
/// sin cos exp log sqrt abs. Malformed input throws std::invalid_argument
/// with the offending position.
double evaluate_expression(const std::string& expr, double x);

/// Vectorized evaluation at every node value in xs.
Vec evaluate_expression(const std::string& expr, const Vec& xs);

}  // namespace voltlab
