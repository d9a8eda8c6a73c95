#pragma once

#include <string>
#include <vector>

#include "voltlab/grid.hpp"
#include "voltlab/linop.hpp"

namespace voltlab {

/// Operator constructed from a textual spec. Grid-based operators act on the
/// supplied grid with quadrature weight h; sequence-model operators
/// (shift_example, kronecker) bring their own dimension and weight 1.
struct ParsedOperator {
  std::string canonical;  // normalized spec string
  bool complex_valued = false;
  LinOp<double> real_op;
  LinOp<cplx> complex_op;
  Grid grid;              // grid the operator acts on
  double weight = 1.0;    // norm/pairing weight of the natural space

  int dim() const { return complex_valued ? complex_op.dim() : real_op.dim(); }
};

/// Accepted forms:
///   V                    cumulative sum (includes the diagonal node)
///   M                    multiplication by x
///   cesaro               running average with the max(x, h) divisor
///   T_alpha:<expr>       alpha(x) .* (V f)
///   S_alpha:<expr>       V (alpha(x) .* f)
///   R_s:<s>              x^s .* (V f), s a decimal number
///   conv:<expr>          convolution with kernel expr(x)
///   shift_example:<N>    the I + weighted-forward-shift companion, dim N
///   kronecker:<a,b,...>  diagonal rotation by the listed angles (radians)
ParsedOperator parse_operator(const std::string& spec, Grid g);

}  // namespace voltlab
