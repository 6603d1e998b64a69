#pragma once

#include <functional>
#include <string>

namespace nfpc {

/// Variables visible to user expressions.
struct ExpressionVars {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
};

/**
 * Small arithmetic expression language for user-supplied coefficients and
 * costs: numbers, the variables t x y s, the constant pi, + - * / ^, unary
 * minus and the functions exp log sqrt sin cos tan tanh abs min max pow.
 */
class Expression {
public:
    /// Throws ConfigError on a syntax error or unknown identifier.
    static Expression parse(const std::string& text);

    double operator()(const ExpressionVars& v) const { return eval_(v); }
    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::function<double(const ExpressionVars&)> eval_;
};

}  // namespace nfpc
