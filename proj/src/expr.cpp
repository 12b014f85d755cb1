#include "tractoria/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace tractoria {

ExprPtr expr_constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Constant;
  n->number = v;
  return n;
}
ExprPtr expr_coord(int i) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Coord;
  n->coord = i;
  return n;
}
namespace {
ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
} // namespace
ExprPtr expr_add(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr expr_sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr expr_mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr expr_div(ExprPtr a, ExprPtr b) { return binary(ExprKind::Div, std::move(a), std::move(b)); }
ExprPtr expr_neg(ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Neg;
  n->a = std::move(a);
  return n;
}
ExprPtr expr_pow(ExprPtr a, double r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Pow;
  n->a = std::move(a);
  n->number = r;
  return n;
}
ExprPtr expr_call(CallFn fn, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Call;
  n->fn = fn;
  n->a = std::move(a);
  return n;
}

namespace {

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  double num = 0.0;
  std::string text;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& s;
  size_t pos = 0;
  int line = 1, col = 1;
  int last_line = 1, last_col = 1; // position of the last non-EOF token

  explicit Lexer(const std::string& str) : s(str) {}

  void bump(size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (s[pos] == '\n') { line++; col = 1; } else { col++; }
      pos++;
    }
  }

  Token next() {
    while (pos < s.size() && std::isspace(uint8_t(s[pos]))) bump(1);
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= s.size()) {
      // report end-of-input at the last token we saw, which is where the
      // incomplete construct started
      t.kind = Tok::End;
      t.line = last_line;
      t.col = last_col;
      return t;
    }
    last_line = line;
    last_col = col;
    char c = s[pos];
    auto single = [&](Tok k) { t.kind = k; bump(1); return t; };
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      default: break;
    }
    if (std::isdigit(uint8_t(c)) || c == '.') {
      size_t start = pos;
      while (pos < s.size() && (std::isdigit(uint8_t(s[pos])) || s[pos] == '.')) bump(1);
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        size_t save = pos;
        bump(1);
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) bump(1);
        if (pos < s.size() && std::isdigit(uint8_t(s[pos]))) {
          while (pos < s.size() && std::isdigit(uint8_t(s[pos]))) bump(1);
        } else {
          pos = save; // not an exponent after all
        }
      }
      t.kind = Tok::Num;
      t.num = std::strtod(s.substr(start, pos - start).c_str(), nullptr);
      return t;
    }
    if (std::isalpha(uint8_t(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() && (std::isalnum(uint8_t(s[pos])) || s[pos] == '_')) bump(1);
      t.kind = Tok::Ident;
      t.text = s.substr(start, pos - start);
      return t;
    }
    throw parse_error(std::string("unexpected character '") + c + "'", line, col);
  }
};

struct Parser {
  Lexer lex;
  Token cur;

  explicit Parser(const std::string& s) : lex(s) { cur = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error(msg, cur.line, cur.col);
  }

  void advance() { cur = lex.next(); }

  void expect(Tok k, const char* what) {
    if (cur.kind != k) fail(std::string("expected ") + what);
    advance();
  }

  double number_literal() {
    double sign = 1.0;
    while (cur.kind == Tok::Minus || cur.kind == Tok::Plus) {
      if (cur.kind == Tok::Minus) sign = -sign;
      advance();
    }
    if (cur.kind != Tok::Num) fail("expected numeric literal");
    double v = sign * cur.num;
    advance();
    return v;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (cur.kind == Tok::Plus || cur.kind == Tok::Minus) {
      bool plus = cur.kind == Tok::Plus;
      advance();
      ExprPtr r = term();
      e = plus ? expr_add(e, r) : expr_sub(e, r);
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = power();
    while (cur.kind == Tok::Star || cur.kind == Tok::Slash) {
      bool mul = cur.kind == Tok::Star;
      advance();
      ExprPtr r = power();
      e = mul ? expr_mul(e, r) : expr_div(e, r);
    }
    return e;
  }

  // unary minus binds tighter than '^'; the exponent is a numeric literal
  ExprPtr power() {
    ExprPtr base = unary();
    if (cur.kind == Tok::Caret) {
      advance();
      double r = number_literal();
      return expr_pow(base, r);
    }
    return base;
  }

  ExprPtr unary() {
    if (cur.kind == Tok::Minus) {
      advance();
      return expr_neg(unary());
    }
    if (cur.kind == Tok::Plus) {
      advance();
      return unary();
    }
    return atom();
  }

  ExprPtr atom() {
    if (cur.kind == Tok::Num) {
      double v = cur.num;
      advance();
      return expr_constant(v);
    }
    if (cur.kind == Tok::LParen) {
      advance();
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (cur.kind == Tok::Ident) {
      std::string name = cur.text;
      int line = cur.line, col = cur.col;
      advance();
      if (name.size() >= 2 && name[0] == 'x') {
        bool digits = true;
        for (size_t k = 1; k < name.size(); ++k)
          if (!std::isdigit(uint8_t(name[k]))) digits = false;
        if (digits) return expr_coord(std::atoi(name.c_str() + 1));
      }
      if (name == "pow") {
        expect(Tok::LParen, "'('");
        ExprPtr base = expr();
        expect(Tok::Comma, "','");
        double r = number_literal();
        expect(Tok::RParen, "')'");
        return expr_pow(base, r);
      }
      static const std::map<std::string, CallFn> fns = {
          {"exp", CallFn::Exp}, {"log", CallFn::Log}, {"sin", CallFn::Sin},
          {"cos", CallFn::Cos}, {"sqrt", CallFn::Sqrt}};
      auto it = fns.find(name);
      if (it != fns.end()) {
        expect(Tok::LParen, "'('");
        ExprPtr arg = expr();
        expect(Tok::RParen, "')'");
        return expr_call(it->second, arg);
      }
      throw parse_error("unknown identifier '" + name + "'", line, col);
    }
    fail("expected expression");
  }
};

} // namespace

ExprPtr parse_expr(const std::string& text) {
  Parser p(text);
  ExprPtr e = p.expr();
  if (p.cur.kind != Tok::End) p.fail("trailing input");
  return e;
}

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    default: return 4;
  }
}

std::string fmt_num(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_rec(const ExprPtr& e, std::string& out, int parent_prec) {
  int prec = precedence(e->kind);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (e->kind) {
    case ExprKind::Constant:
      if (e->number < 0) {
        out += '(';
        out += fmt_num(e->number);
        out += ')';
      } else {
        out += fmt_num(e->number);
      }
      break;
    case ExprKind::Coord:
      out += 'x';
      out += std::to_string(e->coord);
      break;
    case ExprKind::Add:
      print_rec(e->a, out, 1);
      out += " + ";
      print_rec(e->b, out, 1);
      break;
    case ExprKind::Sub:
      print_rec(e->a, out, 1);
      out += " - ";
      print_rec(e->b, out, 2);
      break;
    case ExprKind::Mul:
      print_rec(e->a, out, 2);
      out += "*";
      print_rec(e->b, out, 2);
      break;
    case ExprKind::Div:
      print_rec(e->a, out, 2);
      out += "/";
      print_rec(e->b, out, 3);
      break;
    case ExprKind::Neg:
      out += "-";
      print_rec(e->a, out, 4);
      break;
    case ExprKind::Pow:
      out += "pow(";
      print_rec(e->a, out, 0);
      out += ", ";
      out += fmt_num(e->number);
      out += ")";
      break;
    case ExprKind::Call: {
      static const char* names[] = {"exp", "log", "sin", "cos", "sqrt"};
      out += names[int(e->fn)];
      out += '(';
      print_rec(e->a, out, 0);
      out += ')';
      break;
    }
  }
  if (paren) out += ')';
}

} // namespace

std::string print_expr(const ExprPtr& e) {
  std::string s;
  print_rec(e, s, 0);
  return s;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Constant: return a->number == b->number;
    case ExprKind::Coord: return a->coord == b->coord;
    case ExprKind::Pow:
      return a->number == b->number && expr_equal(a->a, b->a);
    case ExprKind::Call:
      return a->fn == b->fn && expr_equal(a->a, b->a);
    case ExprKind::Neg: return expr_equal(a->a, b->a);
    default:
      return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
}

int max_coord(const ExprPtr& e) {
  if (!e) return -1;
  int m = (e->kind == ExprKind::Coord) ? e->coord : -1;
  if (e->a) m = std::max(m, max_coord(e->a));
  if (e->b) m = std::max(m, max_coord(e->b));
  return m;
}

Jet eval_expr(const ExprPtr& e, const std::vector<Jet>& coords) {
  switch (e->kind) {
    case ExprKind::Constant: {
      Jet j = coords[0];
      std::fill(j.coeffs().begin(), j.coeffs().end(), 0.0);
      j.coeffs()[0] = e->number;
      return j;
    }
    case ExprKind::Coord:
      if (e->coord >= int(coords.size()))
        throw usage_error("coordinate index exceeds chart dimension");
      return coords[e->coord];
    case ExprKind::Add: return eval_expr(e->a, coords) + eval_expr(e->b, coords);
    case ExprKind::Sub: return eval_expr(e->a, coords) - eval_expr(e->b, coords);
    case ExprKind::Mul: return eval_expr(e->a, coords) * eval_expr(e->b, coords);
    case ExprKind::Div: return eval_expr(e->a, coords) / eval_expr(e->b, coords);
    case ExprKind::Neg: return -eval_expr(e->a, coords);
    case ExprKind::Pow: return jet_pow(eval_expr(e->a, coords), e->number);
    case ExprKind::Call: {
      Jet a = eval_expr(e->a, coords);
      switch (e->fn) {
        case CallFn::Exp: return apply_analytic(AnalyticFn::Exp, a);
        case CallFn::Log: return apply_analytic(AnalyticFn::Log, a);
        case CallFn::Sin: return apply_analytic(AnalyticFn::Sin, a);
        case CallFn::Cos: return apply_analytic(AnalyticFn::Cos, a);
        case CallFn::Sqrt: return apply_analytic(AnalyticFn::Sqrt, a);
      }
      break;
    }
  }
  throw usage_error("malformed expression tree");
}

double eval_expr_value(const ExprPtr& e, std::span<const double> point) {
  switch (e->kind) {
    case ExprKind::Constant: return e->number;
    case ExprKind::Coord:
      if (e->coord >= int(point.size()))
        throw usage_error("coordinate index exceeds chart dimension");
      return point[e->coord];
    case ExprKind::Add: return eval_expr_value(e->a, point) + eval_expr_value(e->b, point);
    case ExprKind::Sub: return eval_expr_value(e->a, point) - eval_expr_value(e->b, point);
    case ExprKind::Mul: return eval_expr_value(e->a, point) * eval_expr_value(e->b, point);
    case ExprKind::Div: return eval_expr_value(e->a, point) / eval_expr_value(e->b, point);
    case ExprKind::Neg: return -eval_expr_value(e->a, point);
    case ExprKind::Pow: {
      double b = eval_expr_value(e->a, point);
      return std::pow(b, e->number);
    }
    case ExprKind::Call: {
      double a = eval_expr_value(e->a, point);
      switch (e->fn) {
        case CallFn::Exp: return std::exp(a);
        case CallFn::Log:
          if (a <= 0) throw numeric_error("log of non-positive value");
          return std::log(a);
        case CallFn::Sin: return std::sin(a);
        case CallFn::Cos: return std::cos(a);
        case CallFn::Sqrt:
          if (a < 0) throw numeric_error("sqrt of negative value");
          return std::sqrt(a);
      }
      break;
    }
  }
  throw usage_error("malformed expression tree");
}

} // namespace tractoria
