#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifit/error.hpp"
#include "ifit/field.hpp"

namespace ifit {

class ParseError : public Error {
public:
  ParseError(std::size_t position, std::string message);
  // Byte offset into the source string.
  std::size_t position() const { return position_; }
  const std::string& detail() const { return detail_; }

private:
  std::size_t position_;
  std::string detail_;
};

// Domain error during evaluation (log of a nonpositive number, ...).
class EvalError : public Error {
public:
  EvalError(std::string subexpression, std::string message);
  const std::string& subexpression() const { return subexpression_; }

private:
  std::string subexpression_;
};

// Parsed scalar expression over an ordered list of named variables.
//
// Grammar (EBNF, whitespace ignored):
//
//   expr    = term , { ("+" | "-") , term } ;
//   term    = unary , { ("*" | "/") , unary } ;
//   unary   = ("-" | "+") , unary | power ;
//   power   = primary , [ "^" , unary ] ;          (* right-associative *)
//   primary = number | "pi" | name | func , "(" , expr , ")" | "(" , expr , ")" ;
//   func    = "sin" | "cos" | "exp" | "log" | "abs" | "sqrt" ;
//   number  = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;
//
// Values are immutable; copies share the node storage.
class Expr {
public:
  enum class Op : std::uint8_t {
    Number, Pi, Variable, Neg, Add, Sub, Mul, Div, Pow,
    Sin, Cos, Exp, Log, Abs, Sqrt,
  };

  Expr() = default;

  static Expr parse(std::string_view src, std::span<const std::string> vars);

  double eval(std::span<const double> point) const;

  // Canonical, fully parenthesized form; parse(print()) reproduces the tree.
  std::string print() const;

  const std::vector<std::string>& variables() const;
  std::size_t arity() const { return variables().size(); }

  // Names of the variables the expression actually references.
  std::vector<std::string> free_variables() const;

  bool operator==(const Expr& other) const;

  // Callable view suitable for the numerical modules.
  ScalarField field() const;

private:
  struct Node {
    Op op = Op::Number;
    double value = 0.0;   // Number literal
    std::uint32_t a = 0;  // first child or variable slot
    std::uint32_t b = 0;  // second child
  };
  struct Data {
    std::vector<Node> nodes;
    std::uint32_t root = 0;
    std::vector<std::string> vars;
  };

  double eval_node(std::uint32_t i, std::span<const double> point) const;
  void print_node(std::uint32_t i, std::string& out) const;
  bool equal_node(std::uint32_t i, const Expr& other, std::uint32_t j) const;

  std::shared_ptr<const Data> data_;

  friend class ExprParser;
};

Expr parse(std::string_view src, std::span<const std::string> vars);
double eval(const Expr& e, std::span<const double> point);

}  // namespace ifit
