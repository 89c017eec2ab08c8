#include "boltz/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace boltz {

namespace {

bool is_const(const ExprPtr& e, double v) {
    return e->kind == ExprKind::Constant && e->value == v;
}

bool is_const(const ExprPtr& e) { return e->kind == ExprKind::Constant; }

ExprPtr make_unary(ExprKind kind, ExprPtr a) {
    auto n = std::make_shared<Expr>();
    n->kind = kind;
    n->a = std::move(a);
    return n;
}

ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<Expr>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double ipow(double base, int e) {
    if (e == 0) return 1.0;
    if (e < 0) {
        if (base == 0.0) throw ExprDomainError("0 raised to a negative power");
        return 1.0 / ipow(base, -e);
    }
    double r = 1.0, b = base;
    int k = e;
    while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

}  // namespace

double Expr::eval(const double* x, int n) const {
    switch (kind) {
        case ExprKind::Constant: return value;
        case ExprKind::Variable:
            if (index >= n) throw ExprDomainError("variable index out of range");
            return x[index];
        case ExprKind::Add: return a->eval(x, n) + b->eval(x, n);
        case ExprKind::Sub: return a->eval(x, n) - b->eval(x, n);
        case ExprKind::Mul: return a->eval(x, n) * b->eval(x, n);
        case ExprKind::Div: {
            const double den = b->eval(x, n);
            if (den == 0.0) throw ExprDomainError("division by zero");
            return a->eval(x, n) / den;
        }
        case ExprKind::Pow: return ipow(a->eval(x, n), exponent);
        case ExprKind::Neg: return -a->eval(x, n);
        case ExprKind::Sin: return std::sin(a->eval(x, n));
        case ExprKind::Cos: return std::cos(a->eval(x, n));
        case ExprKind::Exp: return std::exp(a->eval(x, n));
        case ExprKind::Log: {
            const double v = a->eval(x, n);
            if (v <= 0.0) throw ExprDomainError("log of a non-positive number");
            return std::log(v);
        }
        case ExprKind::Sqrt: {
            const double v = a->eval(x, n);
            if (v < 0.0) throw ExprDomainError("sqrt of a negative number");
            return std::sqrt(v);
        }
    }
    throw std::logic_error("unreachable expression kind");
}

int Expr::size() const {
    int s = 1;
    if (a) s += a->size();
    if (b) s += b->size();
    return s;
}

ExprPtr constant(double v) {
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return n;
}

ExprPtr variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be non-negative");
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Variable;
    n->index = index;
    return n;
}

ExprPtr add(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b)) return constant(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make_binary(ExprKind::Add, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b)) return constant(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(std::move(b));
    return make_binary(ExprKind::Sub, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
    if (is_const(a) && is_const(b)) return constant(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make_binary(ExprKind::Mul, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b) {
    if (is_const(b, 0.0)) throw ExprDomainError("division by constant zero");
    if (is_const(a) && is_const(b)) return constant(a->value / b->value);
    if (is_const(a, 0.0)) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    return make_binary(ExprKind::Div, std::move(a), std::move(b));
}

ExprPtr powi(ExprPtr a, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return a;
    if (is_const(a)) return constant(ipow(a->value, exponent));
    auto n = std::make_shared<Expr>();
    n->kind = ExprKind::Pow;
    n->a = std::move(a);
    n->exponent = exponent;
    return n;
}

ExprPtr neg(ExprPtr a) {
    if (is_const(a)) return constant(-a->value);
    if (a->kind == ExprKind::Neg) return a->a;
    return make_unary(ExprKind::Neg, std::move(a));
}

ExprPtr sin(ExprPtr a) {
    if (is_const(a)) return constant(std::sin(a->value));
    return make_unary(ExprKind::Sin, std::move(a));
}

ExprPtr cos(ExprPtr a) {
    if (is_const(a)) return constant(std::cos(a->value));
    return make_unary(ExprKind::Cos, std::move(a));
}

ExprPtr exp(ExprPtr a) {
    if (is_const(a)) return constant(std::exp(a->value));
    return make_unary(ExprKind::Exp, std::move(a));
}

ExprPtr log(ExprPtr a) {
    // Do not fold out-of-domain constants; evaluation reports them.
    if (is_const(a) && a->value > 0.0) return constant(std::log(a->value));
    return make_unary(ExprKind::Log, std::move(a));
}

ExprPtr sqrt(ExprPtr a) {
    if (is_const(a) && a->value >= 0.0) return constant(std::sqrt(a->value));
    return make_unary(ExprKind::Sqrt, std::move(a));
}

ExprPtr derivative(const ExprPtr& e, int var) {
    switch (e->kind) {
        case ExprKind::Constant: return constant(0.0);
        case ExprKind::Variable: return constant(e->index == var ? 1.0 : 0.0);
        case ExprKind::Add: return add(derivative(e->a, var), derivative(e->b, var));
        case ExprKind::Sub: return sub(derivative(e->a, var), derivative(e->b, var));
        case ExprKind::Mul:
            return add(mul(derivative(e->a, var), e->b), mul(e->a, derivative(e->b, var)));
        case ExprKind::Div:
            return div(sub(mul(derivative(e->a, var), e->b), mul(e->a, derivative(e->b, var))),
                       powi(e->b, 2));
        case ExprKind::Pow:
            return mul(mul(constant(double(e->exponent)), powi(e->a, e->exponent - 1)),
                       derivative(e->a, var));
        case ExprKind::Neg: return neg(derivative(e->a, var));
        case ExprKind::Sin: return mul(cos(e->a), derivative(e->a, var));
        case ExprKind::Cos: return neg(mul(sin(e->a), derivative(e->a, var)));
        case ExprKind::Exp: return mul(exp(e->a), derivative(e->a, var));
        case ExprKind::Log: return div(derivative(e->a, var), e->a);
        case ExprKind::Sqrt:
            return div(derivative(e->a, var), mul(constant(2.0), sqrt(e->a)));
    }
    throw std::logic_error("unreachable expression kind");
}

namespace {

// Pretty printing with minimal parentheses.  Precedence levels:
// 0 add/sub, 1 mul/div, 2 unary minus, 3 pow/atoms.
void render(const Expr& e, std::ostream& os, int parent_prec) {
    const auto paren = [&](int prec, auto&& body) {
        if (prec < parent_prec) {
            os << '(';
            body();
            os << ')';
        } else {
            body();
        }
    };
    switch (e.kind) {
        case ExprKind::Constant: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << e.value;
            const std::string s = tmp.str();
            if (e.value < 0.0)
                paren(2, [&] { os << s; });
            else
                os << s;
            break;
        }
        case ExprKind::Variable: os << 'x' << (e.index + 1); break;
        case ExprKind::Add:
            paren(0, [&] {
                render(*e.a, os, 0);
                os << " + ";
                render(*e.b, os, 1);
            });
            break;
        case ExprKind::Sub:
            paren(0, [&] {
                render(*e.a, os, 0);
                os << " - ";
                render(*e.b, os, 1);
            });
            break;
        case ExprKind::Mul:
            paren(1, [&] {
                render(*e.a, os, 1);
                os << "*";
                render(*e.b, os, 2);
            });
            break;
        case ExprKind::Div:
            paren(1, [&] {
                render(*e.a, os, 1);
                os << "/";
                render(*e.b, os, 2);
            });
            break;
        case ExprKind::Pow:
            paren(3, [&] {
                render(*e.a, os, 4);
                os << '^' << e.exponent;
            });
            break;
        case ExprKind::Neg:
            paren(2, [&] {
                os << '-';
                render(*e.a, os, 3);
            });
            break;
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Log:
        case ExprKind::Sqrt: {
            static const char* names[] = {"sin", "cos", "exp", "log", "sqrt"};
            os << names[int(e.kind) - int(ExprKind::Sin)] << '(';
            render(*e.a, os, 0);
            os << ')';
            break;
        }
    }
}

class Parser {
  public:
    Parser(const std::string& text, int dimension) : text_(text), dim_(dimension) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

  private:
    const std::string& text_;
    int dim_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr e;
        if (accept('+'))
            e = parse_term();
        else if (accept('-'))
            e = neg(parse_term());
        else
            e = parse_term();
        for (;;) {
            if (accept('+'))
                e = add(e, parse_term());
            else if (accept('-'))
                e = sub(e, parse_term());
            else
                return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = mul(e, parse_factor());
            else if (accept('/'))
                e = div(e, parse_factor());
            else
                return e;
        }
    }

    ExprPtr parse_factor() {
        if (accept('-')) return neg(parse_factor());
        ExprPtr base = parse_base();
        if (accept('^')) return powi(std::move(base), parse_int());
        return base;
    }

    int parse_int() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits) throw ParseError("expected integer exponent", start);
        int v = 0;
        auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || p != text_.data() + pos_)
            throw ParseError("bad integer exponent", start);
        return v;
    }

    ExprPtr parse_base() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to something else; not a valid exponent
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || p != text_.data() + pos_)
            throw ParseError("bad number literal", start);
        return constant(v);
    }

    ExprPtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return variable(0);
        if (name.size() > 1 && name[0] == 'x') {
            int idx = 0;
            auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
            if (ec == std::errc() && p == name.data() + name.size()) {
                if (idx < 1 || idx > dim_)
                    throw ParseError("variable index out of range for dimension " +
                                         std::to_string(dim_),
                                     start);
                return variable(idx - 1);
            }
        }
        static const std::pair<const char*, ExprPtr (*)(ExprPtr)> fns[] = {
            {"sin", sin}, {"cos", cos}, {"exp", exp}, {"log", log}, {"sqrt", sqrt}};
        for (const auto& [fname, fn] : fns) {
            if (name == fname) {
                if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
                ExprPtr arg = parse_expr();
                if (!accept(')')) throw ParseError("expected ')'", pos_);
                return fn(std::move(arg));
            }
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

}  // namespace

std::string Expr::to_string() const {
    std::ostringstream os;
    render(*this, os, 0);
    return os.str();
}

ExprPtr parse(const std::string& text, int dimension) {
    if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
    return Parser(text, dimension).run();
}

}  // namespace boltz
