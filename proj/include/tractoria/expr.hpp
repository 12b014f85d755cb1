#ifndef TRACTORIA_EXPR_HPP
#define TRACTORIA_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include "tractoria/jet.hpp"

namespace tractoria {

enum class ExprKind : uint8_t {
  Constant, Coord, Add, Sub, Mul, Div, Neg, Pow, Call
};

enum class CallFn : uint8_t { Exp, Log, Sin, Cos, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double number = 0.0;   // Constant value or Pow exponent
  int coord = -1;        // Coord index
  CallFn fn = CallFn::Exp;
  ExprPtr a, b;          // children
};

ExprPtr expr_constant(double v);
ExprPtr expr_coord(int i);
ExprPtr expr_add(ExprPtr a, ExprPtr b);
ExprPtr expr_sub(ExprPtr a, ExprPtr b);
ExprPtr expr_mul(ExprPtr a, ExprPtr b);
ExprPtr expr_div(ExprPtr a, ExprPtr b);
ExprPtr expr_neg(ExprPtr a);
ExprPtr expr_pow(ExprPtr a, double r);
ExprPtr expr_call(CallFn fn, ExprPtr a);

// Recursive-descent parser for metric entry expressions.
// Precedence (tightest first): unary minus, '^', '*' '/', '+' '-'.
// Functions: exp log sin cos sqrt, plus pow(expr, number).
// Coordinates are named x0..x9. Numbers in decimal or scientific notation.
ExprPtr parse_expr(const std::string& text);

std::string print_expr(const ExprPtr& e);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Largest coordinate index used, or -1 for constant expressions.
int max_coord(const ExprPtr& e);

// Evaluate over jet arithmetic; coords[i] is the jet of coordinate i.
Jet eval_expr(const ExprPtr& e, const std::vector<Jet>& coords);

double eval_expr_value(const ExprPtr& e, std::span<const double> point);

} // namespace tractoria

#endif
