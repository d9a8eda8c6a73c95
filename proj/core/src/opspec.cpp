#include "voltlab/opspec.hpp"

#include <cstdlib>
#include <stdexcept>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/expr.hpp"
#include "voltlab/operators.hpp"

namespace voltlab {

namespace {

double parse_number(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw std::invalid_argument(std::string("operator spec: bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

ParsedOperator parse_operator(const std::string& spec, Grid g) {
  ParsedOperator out;
  out.canonical = spec;
  out.grid = g;
  out.weight = g.h;

  const std::size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "V") {
    out.real_op = volterra(g);
  } else if (head == "M") {
    out.real_op = mult_by_x(g);
  } else if (head == "cesaro") {
    out.real_op = cesaro(g);
  } else if (head == "T_alpha") {
    out.real_op = weighted_volterra_left(g, evaluate_expression(arg, g.nodes()));
  } else if (head == "S_alpha") {
    out.real_op = weighted_volterra_right(g, evaluate_expression(arg, g.nodes()));
  } else if (head == "R_s") {
    out.real_op = power_weighted_volterra(g, parse_number(arg, "exponent"));
  } else if (head == "conv") {
    out.real_op = conv_matrix(ConvElement<double>(g, evaluate_expression(arg, g.nodes())));
  } else if (head == "shift_example") {
    const long n = std::strtol(arg.c_str(), nullptr, 10);
    if (n < 3) throw std::invalid_argument("operator spec: shift_example needs N >= 3");
    out.real_op = shift_example(int(n)).T;
    out.weight = 1.0;  // sequence model: grid field is not meaningful here
  } else if (head == "kronecker") {
    std::vector<double> angles;
    std::size_t pos = 0;
    while (pos <= arg.size()) {
      const std::size_t comma = arg.find(',', pos);
      const std::string tok =
          arg.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      angles.push_back(evaluate_expression(tok, 0.0));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    out.complex_valued = true;
    out.complex_op = torus_rotation(angles);
    out.weight = 1.0;  // sequence model: grid field is not meaningful here
  } else {
    throw std::invalid_argument("operator spec: unknown operator '" + spec + "'");
  }
  return out;
}

}  // namespace voltlab
