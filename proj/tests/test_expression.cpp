#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nfpc/error.hpp"
#include "nfpc/expression.hpp"

using nfpc::ConfigError;
using nfpc::Expression;
using nfpc::ExpressionVars;

namespace {

double eval(const std::string& text, ExpressionVars v = {}) { return Expression::parse(text)(v); }

}  // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(eval("1 + 2 * 3") == 7.0);
    CHECK(eval("(1 + 2) * 3") == 9.0);
    CHECK(eval("8 / 4 / 2") == 1.0);
    CHECK(eval("2 - 3 - 4") == -5.0);
    CHECK(eval("2 ^ 3 ^ 2") == 512.0);
    CHECK(eval("-2 ^ 2") == -4.0);
    CHECK(eval("-(1 - 3)") == 2.0);
    CHECK(eval("1.5e-1 * 10") == doctest::Approx(1.5));
    CHECK(eval("pi") == std::numbers::pi);
}

TEST_CASE("variables and functions") {
    const ExpressionVars v{0.5, -1.0, 2.0, 3.0};
    CHECK(eval("t + x + y + s", v) == 4.5);
    CHECK(eval("s / (1 + s)", v) == 0.75);
    CHECK(eval("exp(0) + log(1) + sqrt(4)") == 3.0);
    CHECK(eval("sin(0) + cos(0) + tan(0) + tanh(0)") == 1.0);
    CHECK(eval("abs(x) + min(x, y) + max(x, y)", v) == 2.0);
    CHECK(eval("pow(2, 10)") == 1024.0);
    CHECK(eval("(x - 0.5)^2", v) == 2.25);
}

TEST_CASE("syntax errors are configuration errors") {
    for (const char* bad : {"", "1 +", "(1", "1)", "foo", "exp(1, 2)", "min(1)", "2 ** 3", "x y", "sqrt"})
        CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
}
