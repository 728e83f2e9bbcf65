#include "ifit/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ifit/format.hpp"

namespace ifit {

ParseError::ParseError(std::size_t position, std::string message)
    : Error("parse error at offset " + std::to_string(position) + ": " + message),
      position_(position),
      detail_(std::move(message)) {}

EvalError::EvalError(std::string subexpression, std::string message)
    : Error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

namespace {

struct FunctionName {
  std::string_view name;
  Expr::Op op;
};

constexpr std::array<FunctionName, 6> kFunctions{{
    {"sin", Expr::Op::Sin},
    {"cos", Expr::Op::Cos},
    {"exp", Expr::Op::Exp},
    {"log", Expr::Op::Log},
    {"abs", Expr::Op::Abs},
    {"sqrt", Expr::Op::Sqrt},
}};

bool is_reserved(std::string_view name) {
  if (name == "pi") return true;
  return std::any_of(kFunctions.begin(), kFunctions.end(),
                     [&](const FunctionName& f) { return f.name == name; });
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string_view text;
  double number = 0.0;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::Name: return "name";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "token";
}

}  // namespace

class ExprParser {
public:
  ExprParser(std::string_view src, std::span<const std::string> vars) : src_(src) {
    data_ = std::make_shared<Expr::Data>();
    for (const auto& v : vars) {
      if (!is_identifier(v)) throw Error("invalid variable name '" + v + "'");
      if (is_reserved(v)) throw Error("variable name '" + v + "' is reserved");
      if (std::find(data_->vars.begin(), data_->vars.end(), v) != data_->vars.end())
        throw Error("duplicate variable name '" + v + "'");
      data_->vars.push_back(v);
    }
  }

  Expr run() {
    advance();
    if (tok_.kind == Tok::End) throw ParseError(0, "empty expression");
    data_->root = parse_expr();
    if (tok_.kind == Tok::RParen) throw ParseError(tok_.pos, "unbalanced ')'");
    if (tok_.kind != Tok::End)
      throw ParseError(tok_.pos, std::string("unexpected ") + describe(tok_.kind));
    Expr e;
    e.data_ = std::move(data_);
    return e;
  }

private:
  std::uint32_t add(Expr::Op op, double value = 0.0, std::uint32_t a = 0, std::uint32_t b = 0) {
    data_->nodes.push_back({op, value, a, b});
    return static_cast<std::uint32_t>(data_->nodes.size() - 1);
  }

  std::size_t clamp_pos(std::size_t p) const {
    return src_.empty() ? 0 : std::min(p, src_.size() - 1);
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      tok_.pos = clamp_pos(pos_);
      return;
    }
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      tok_.kind = k;
      tok_.text = src_.substr(pos_, 1);
      ++pos_;
    };
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
        ++end;
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t e = end + 1;
        if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
        if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
          while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
          end = e;
        }
      }
      double v = 0.0;
      auto res = std::from_chars(src_.data() + pos_, src_.data() + end, v);
      if (res.ec != std::errc() || res.ptr != src_.data() + end)
        throw ParseError(pos_, "malformed number '" + std::string(src_.substr(pos_, end - pos_)) + "'");
      tok_.kind = Tok::Number;
      tok_.number = v;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      tok_.kind = Tok::Name;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    throw ParseError(pos_, "unknown token '" + std::string(1, c) + "'");
  }

  std::uint32_t parse_expr() {
    std::uint32_t lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const auto op = tok_.kind == Tok::Plus ? Expr::Op::Add : Expr::Op::Sub;
      advance();
      const std::uint32_t rhs = parse_term();
      lhs = add(op, 0.0, lhs, rhs);
    }
    return lhs;
  }

  std::uint32_t parse_term() {
    std::uint32_t lhs = parse_unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const auto op = tok_.kind == Tok::Star ? Expr::Op::Mul : Expr::Op::Div;
      advance();
      const std::uint32_t rhs = parse_unary();
      lhs = add(op, 0.0, lhs, rhs);
    }
    return lhs;
  }

  std::uint32_t parse_unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return add(Expr::Op::Neg, 0.0, parse_unary());
    }
    if (tok_.kind == Tok::Plus) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  std::uint32_t parse_power() {
    const std::uint32_t base = parse_primary();
    if (tok_.kind == Tok::Caret) {
      advance();
      const std::uint32_t exponent = parse_unary();
      return add(Expr::Op::Pow, 0.0, base, exponent);
    }
    return base;
  }

  void expect_rparen(std::size_t open_pos) {
    if (tok_.kind != Tok::RParen)
      throw ParseError(tok_.kind == Tok::End ? open_pos : tok_.pos,
                       tok_.kind == Tok::End ? "unbalanced '('"
                                             : std::string("expected ')' but found ") + describe(tok_.kind));
    advance();
  }

  std::uint32_t parse_primary() {
    switch (tok_.kind) {
      case Tok::Number: {
        const double v = tok_.number;
        advance();
        return add(Expr::Op::Number, v);
      }
      case Tok::LParen: {
        const std::size_t open = tok_.pos;
        advance();
        const std::uint32_t inner = parse_expr();
        expect_rparen(open);
        return inner;
      }
      case Tok::Name: {
        const std::string_view name = tok_.text;
        const std::size_t at = tok_.pos;
        advance();
        if (name == "pi") return add(Expr::Op::Pi);
        for (const auto& fn : kFunctions) {
          if (fn.name != name) continue;
          if (tok_.kind != Tok::LParen)
            throw ParseError(at, "function '" + std::string(name) + "' needs an argument in parentheses");
          const std::size_t open = tok_.pos;
          advance();
          const std::uint32_t arg = parse_expr();
          expect_rparen(open);
          return add(fn.op, 0.0, arg);
        }
        if (tok_.kind == Tok::LParen)
          throw ParseError(at, "unknown function '" + std::string(name) + "'");
        const auto& vars = data_->vars;
        const auto it = std::find(vars.begin(), vars.end(), name);
        if (it == vars.end())
          throw ParseError(at, "undeclared variable '" + std::string(name) + "'");
        return add(Expr::Op::Variable, 0.0, static_cast<std::uint32_t>(it - vars.begin()));
      }
      case Tok::RParen:
        throw ParseError(tok_.pos, "unbalanced ')'");
      case Tok::End:
        throw ParseError(tok_.pos, "unexpected end of input");
      default:
        throw ParseError(tok_.pos, std::string("unexpected ") + describe(tok_.kind));
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
  std::shared_ptr<Expr::Data> data_;
};

Expr Expr::parse(std::string_view src, std::span<const std::string> vars) {
  return ExprParser(src, vars).run();
}

const std::vector<std::string>& Expr::variables() const {
  static const std::vector<std::string> empty;
  return data_ ? data_->vars : empty;
}

double Expr::eval(std::span<const double> point) const {
  if (!data_) throw Error("evaluating an empty expression");
  if (point.size() != data_->vars.size())
    throw std::invalid_argument("expression expects " + std::to_string(data_->vars.size()) +
                                " coordinates, got " + std::to_string(point.size()));
  return eval_node(data_->root, point);
}

double Expr::eval_node(std::uint32_t i, std::span<const double> point) const {
  const Node& n = data_->nodes[i];
  auto fail = [&](const char* what) -> double {
    std::string text;
    print_node(i, text);
    throw EvalError(text, what);
  };
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Pi: return std::numbers::pi;
    case Op::Variable: return point[n.a];
    case Op::Neg: return -eval_node(n.a, point);
    case Op::Add: return eval_node(n.a, point) + eval_node(n.b, point);
    case Op::Sub: return eval_node(n.a, point) - eval_node(n.b, point);
    case Op::Mul: return eval_node(n.a, point) * eval_node(n.b, point);
    case Op::Div: {
      const double num = eval_node(n.a, point);
      const double den = eval_node(n.b, point);
      if (den == 0.0) return fail("division by zero");
      return num / den;
    }
    case Op::Pow: {
      const double base = eval_node(n.a, point);
      const double ex = eval_node(n.b, point);
      if (ex == 2.0) return base * base;
      const double r = std::pow(base, ex);
      if (std::isnan(r) && !std::isnan(base) && !std::isnan(ex))
        return fail("negative base with non-integer exponent");
      if (std::isinf(r) && std::isfinite(base) && std::isfinite(ex) && base == 0.0)
        return fail("zero raised to a negative power");
      return r;
    }
    case Op::Sin: return std::sin(eval_node(n.a, point));
    case Op::Cos: return std::cos(eval_node(n.a, point));
    case Op::Exp: return std::exp(eval_node(n.a, point));
    case Op::Log: {
      const double v = eval_node(n.a, point);
      if (!(v > 0.0)) return fail("log of a nonpositive number");
      return std::log(v);
    }
    case Op::Abs: return std::fabs(eval_node(n.a, point));
    case Op::Sqrt: {
      const double v = eval_node(n.a, point);
      if (v < 0.0) return fail("sqrt of a negative number");
      return std::sqrt(v);
    }
  }
  return 0.0;
}

void Expr::print_node(std::uint32_t i, std::string& out) const {
  const Node& n = data_->nodes[i];
  auto binary = [&](const char* op) {
    out += '(';
    print_node(n.a, out);
    out += ' ';
    out += op;
    out += ' ';
    print_node(n.b, out);
    out += ')';
  };
  auto func = [&](const char* name) {
    out += name;
    out += '(';
    print_node(n.a, out);
    out += ')';
  };
  switch (n.op) {
    case Op::Number: out += format_double(n.value); break;
    case Op::Pi: out += "pi"; break;
    case Op::Variable: out += data_->vars[n.a]; break;
    case Op::Neg:
      out += "(-";
      print_node(n.a, out);
      out += ')';
      break;
    case Op::Add: binary("+"); break;
    case Op::Sub: binary("-"); break;
    case Op::Mul: binary("*"); break;
    case Op::Div: binary("/"); break;
    case Op::Pow: binary("^"); break;
    case Op::Sin: func("sin"); break;
    case Op::Cos: func("cos"); break;
    case Op::Exp: func("exp"); break;
    case Op::Log: func("log"); break;
    case Op::Abs: func("abs"); break;
    case Op::Sqrt: func("sqrt"); break;
  }
}

std::string Expr::print() const {
  if (!data_) return {};
  std::string out;
  print_node(data_->root, out);
  return out;
}

std::vector<std::string> Expr::free_variables() const {
  std::vector<std::string> out;
  if (!data_) return out;
  std::vector<bool> used(data_->vars.size(), false);
  for (const Node& n : data_->nodes)
    if (n.op == Op::Variable) used[n.a] = true;
  for (std::size_t k = 0; k < used.size(); ++k)
    if (used[k]) out.push_back(data_->vars[k]);
  return out;
}

bool Expr::equal_node(std::uint32_t i, const Expr& other, std::uint32_t j) const {
  const Node& x = data_->nodes[i];
  const Node& y = other.data_->nodes[j];
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::Number: return x.value == y.value;
    case Op::Pi: return true;
    case Op::Variable: return data_->vars[x.a] == other.data_->vars[y.a];
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
      return equal_node(x.a, other, y.a) && equal_node(x.b, other, y.b);
    default:
      return equal_node(x.a, other, y.a);
  }
}

bool Expr::operator==(const Expr& other) const {
  if (!data_ || !other.data_) return !data_ && !other.data_;
  return equal_node(data_->root, other, other.data_->root);
}

ScalarField Expr::field() const {
  return [self = *this](std::span<const double> p) { return self.eval(p); };
}

Expr parse(std::string_view src, std::span<const std::string> vars) { return Expr::parse(src, vars); }

double eval(const Expr& e, std::span<const double> point) { return e.eval(point); }

}  // namespace ifit
