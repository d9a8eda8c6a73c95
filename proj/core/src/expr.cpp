#include "voltlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

namespace voltlab {

namespace {

class Parser {
 public:
  Parser(const std::string& src, double x) : src_(src), x_(x) {}

  double run() {
    double v = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression error at position " +
                                std::to_string(pos_) + ": " + what + " in \"" +
                                src_ + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  double expr() {
    double v = term();
    for (;;) {
      if (consume('+')) v += term();
      else if (consume('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (consume('*')) v *= unary();
      else if (consume('/')) v /= unary();
      else return v;
    }
  }

  double unary() {
    if (consume('-')) return -unary();
    return power();
  }

  double power() {
    double base = atom();
    if (consume('^')) return std::pow(base, unary());  // right-assoc, unary rhs ok
    return base;
  }

  double atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      double v = expr();
      if (!consume(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += std::size_t(end - begin);
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string word = src_.substr(start, pos_ - start);
      if (word == "x") return x_;
      if (word == "pi") return std::numbers::pi;
      if (!consume('(')) fail("unknown name '" + word + "'");
      const double arg = expr();
      if (!consume(')')) fail("expected ')' after argument of " + word);
      if (word == "sin") return std::sin(arg);
      if (word == "cos") return std::cos(arg);
      if (word == "exp") return std::exp(arg);
      if (word == "log") return std::log(arg);
      if (word == "sqrt") return std::sqrt(arg);
      if (word == "abs") return std::abs(arg);
      fail("unknown function '" + word + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  double x_;
  std::size_t pos_ = 0;
};

}  // namespace

double evaluate_expression(const std::string& expr, double x) {
  return Parser(expr, x).run();
}

Vec evaluate_expression(const std::string& expr, const Vec& xs) {
  Vec out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    out[i] = Parser(expr, xs[i]).run();
  }
  return out;
}

}  // namespace voltlab
