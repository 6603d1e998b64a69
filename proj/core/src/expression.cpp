#include "nfpc/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "nfpc/error.hpp"

namespace nfpc {

namespace {

using Fn = std::function<double(const ExpressionVars&)>;

class Parser {
public:
    explicit Parser(const std::string& text) : src_(text) {}

    Fn parse() {
        Fn f = expr();
        skip();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + src_ + "': " + what + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Fn expr() {
        Fn lhs = term();
        for (;;) {
            if (accept('+')) {
                Fn rhs = term();
                lhs = [lhs, rhs](const ExpressionVars& v) { return lhs(v) + rhs(v); };
            } else if (accept('-')) {
                Fn rhs = term();
                lhs = [lhs, rhs](const ExpressionVars& v) { return lhs(v) - rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn term() {
        Fn lhs = unary();
        for (;;) {
            if (accept('*')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](const ExpressionVars& v) { return lhs(v) * rhs(v); };
            } else if (accept('/')) {
                Fn rhs = unary();
                lhs = [lhs, rhs](const ExpressionVars& v) { return lhs(v) / rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn unary() {
        if (accept('-')) {
            Fn inner = unary();
            return [inner](const ExpressionVars& v) { return -inner(v); };
        }
        if (accept('+')) return unary();
        return power();
    }

    // right-associative; binds tighter than unary minus on its left
    Fn power() {
        Fn base = primary();
        if (accept('^')) {
            Fn ex = unary();
            return [base, ex](const ExpressionVars& v) { return std::pow(base(v), ex(v)); };
        }
        return base;
    }

    Fn primary() {
        skip();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            return [value](const ExpressionVars&) { return value; };
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (accept('(')) return call(name);
            return variable(name);
        }
        if (accept('(')) {
            Fn inner = expr();
            expect(')');
            return inner;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Fn variable(const std::string& name) {
        if (name == "t") return [](const ExpressionVars& v) { return v.t; };
        if (name == "x") return [](const ExpressionVars& v) { return v.x; };
        if (name == "y") return [](const ExpressionVars& v) { return v.y; };
        if (name == "s") return [](const ExpressionVars& v) { return v.s; };
        if (name == "pi") return [](const ExpressionVars&) { return std::numbers::pi; };
        fail("unknown identifier '" + name + "'");
    }

    Fn call(const std::string& name) {
        std::vector<Fn> args;
        if (!accept(')')) {
            do args.push_back(expr());
            while (accept(','));
            expect(')');
        }
        auto unary_fn = [&](double (*f)(double)) -> Fn {
            if (args.size() != 1) fail(name + " takes one argument");
            Fn a = args[0];
            return [a, f](const ExpressionVars& v) { return f(a(v)); };
        };
        auto binary_fn = [&](double (*f)(double, double)) -> Fn {
            if (args.size() != 2) fail(name + " takes two arguments");
            Fn a = args[0], b = args[1];
            return [a, b, f](const ExpressionVars& v) { return f(a(v), b(v)); };
        };
        if (name == "exp") return unary_fn([](double a) { return std::exp(a); });
        if (name == "log") return unary_fn([](double a) { return std::log(a); });
        if (name == "sqrt") return unary_fn([](double a) { return std::sqrt(a); });
        if (name == "sin") return unary_fn([](double a) { return std::sin(a); });
        if (name == "cos") return unary_fn([](double a) { return std::cos(a); });
        if (name == "tan") return unary_fn([](double a) { return std::tan(a); });
        if (name == "tanh") return unary_fn([](double a) { return std::tanh(a); });
        if (name == "abs") return unary_fn([](double a) { return std::abs(a); });
        if (name == "min") return binary_fn([](double a, double b) { return std::fmin(a, b); });
        if (name == "max") return binary_fn([](double a, double b) { return std::fmax(a, b); });
        if (name == "pow") return binary_fn([](double a, double b) { return std::pow(a, b); });
        fail("unknown function '" + name + "'");
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.eval_ = Parser(e.text_).parse();
    return e;
}

}  // namespace nfpc
