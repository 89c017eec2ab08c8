// Symbolic expression trees for scalar fields on R^N.
//
// Closed node set: constants, variables, +, -, *, /, integer powers, unary
// minus, sin, cos, exp, log, sqrt.  The set is closed under differentiation,
// so gradients, Laplacians and Hessians stay inside it.  Nodes are immutable
// and shared; building and differentiating expressions is cheap compared to
// evaluating them inside quadrature or sampling loops.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

namespace boltz {

enum class ExprKind : std::uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Thrown when an expression is evaluated outside its domain
/// (log of a non-positive number, sqrt of a negative number,
/// division by zero, 0 raised to a negative power).
class ExprDomainError : public std::runtime_error {
  public:
    explicit ExprDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by parse() on malformed input; `position` is the byte offset
/// into the source text where the error was detected.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

class Expr {
  public:
    ExprKind kind;
    double value = 0.0;   // Constant
    int index = 0;        // Variable, 0-based
    int exponent = 0;     // Pow
    ExprPtr a, b;         // children; b unused for unary nodes

    /// Evaluate at the point x[0..n-1].  Variables with index >= n throw.
    [[nodiscard]] double eval(const double* x, int n) const;

    /// Number of nodes in the tree (diagnostic).
    [[nodiscard]] int size() const;

    /// Infix rendering, parseable by parse() for the same dimension.
    [[nodiscard]] std::string to_string() const;
};

// Smart constructors.  Each folds constant operands and applies the
// 0/1 identities (x+0, x*1, x*0, x/1, x^0, x^1, -(-x)); no other
// rewriting is attempted.
[[nodiscard]] ExprPtr constant(double v);
[[nodiscard]] ExprPtr variable(int index);
[[nodiscard]] ExprPtr add(ExprPtr a, ExprPtr b);
[[nodiscard]] ExprPtr sub(ExprPtr a, ExprPtr b);
[[nodiscard]] ExprPtr mul(ExprPtr a, ExprPtr b);
[[nodiscard]] ExprPtr div(ExprPtr a, ExprPtr b);
[[nodiscard]] ExprPtr powi(ExprPtr a, int exponent);
[[nodiscard]] ExprPtr neg(ExprPtr a);
[[nodiscard]] ExprPtr sin(ExprPtr a);
[[nodiscard]] ExprPtr cos(ExprPtr a);
[[nodiscard]] ExprPtr exp(ExprPtr a);
[[nodiscard]] ExprPtr log(ExprPtr a);
[[nodiscard]] ExprPtr sqrt(ExprPtr a);

/// Partial derivative with respect to variable `var`, simplified with the
/// same constant folding and identity rules the constructors apply.
[[nodiscard]] ExprPtr derivative(const ExprPtr& e, int var);

/// Parse an expression in `dimension` variables.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' integer)?
///   base   := number | 'x' | 'x1'..'xN' | '(' expr ')' | fn '(' expr ')'
///   fn     := sin | cos | exp | log | sqrt
///
/// 'x' is accepted as a synonym for 'x1'.  Unknown identifiers and variable
/// indices above `dimension` raise ParseError.
[[nodiscard]] ExprPtr parse(const std::string& text, int dimension);

}  // namespace boltz
