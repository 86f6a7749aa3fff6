// Expression grammar, parse errors with positions, and the guarantee that
// the double path and the jet path evaluate the same algebra.

#include <gtest/gtest.h>

#include <cmath>

#include "finsler/expression.hpp"

using namespace finsler;

namespace {

double ev(const std::string& src, int m, const BasePoint& p) {
    return Expression::parse(src, m).eval(p);
}

} // namespace

TEST(ExpressionTest, EuclideanNorm) {
    BasePoint p{{0.0, 0.0, 0.0}, {3.0, 4.0, 0.0}};
    EXPECT_DOUBLE_EQ(ev("sqrt(y1^2 + y2^2 + y3^2)", 3, p), 5.0);
}

TEST(ExpressionTest, PrecedenceAndAssociativity) {
    BasePoint p{{2.0}, {1.0}};
    EXPECT_DOUBLE_EQ(ev("2 + 3 * 4 ^ 2", 1, p), 50.0);
    EXPECT_DOUBLE_EQ(ev("2 - 3 - 4", 1, p), -5.0);
    EXPECT_DOUBLE_EQ(ev("12 / 3 / 2", 1, p), 2.0);
    EXPECT_DOUBLE_EQ(ev("2 * (3 + 4)", 1, p), 14.0);
    EXPECT_DOUBLE_EQ(ev("x1 ^ 3", 1, p), 8.0);
    EXPECT_DOUBLE_EQ(ev("2 * x1 ^ 3", 1, p), 16.0);
}

TEST(ExpressionTest, NumberFormats) {
    BasePoint p{{0.0}, {1.0}};
    EXPECT_DOUBLE_EQ(ev("1.5e2", 1, p), 150.0);
    EXPECT_DOUBLE_EQ(ev("1.5E-1", 1, p), 0.15);
    EXPECT_DOUBLE_EQ(ev(".5 + 2.", 1, p), 2.5);
}

TEST(ExpressionTest, NegativeIntegerExponent) {
    BasePoint p{{0.0}, {2.0}};
    EXPECT_DOUBLE_EQ(ev("y1 ^ -2", 1, p), 0.25);
}

TEST(ExpressionTest, FunctionsMatchStdlib) {
    BasePoint p{{0.7}, {1.3}};
    EXPECT_DOUBLE_EQ(ev("sin(x1) + cos(y1)", 1, p), std::sin(0.7) + std::cos(1.3));
    EXPECT_DOUBLE_EQ(ev("exp(x1) * log(y1)", 1, p), std::exp(0.7) * std::log(1.3));
}

TEST(ExpressionTest, SyntaxErrorCarriesPosition) {
    try {
        Expression::parse("sqrt(y1^2 +", 3);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        // failure is at or past the dangling '+'
        EXPECT_GE(e.offset, 10u);
        EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
}

TEST(ExpressionTest, UnknownIdentifier) {
    try {
        Expression::parse("x1 + x4", 3);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset, 5u);
    }
    EXPECT_THROW(Expression::parse("foo(x1)", 3), ParseError);
    EXPECT_THROW(Expression::parse("z1", 3), ParseError);
}

TEST(ExpressionTest, ArityAndBracketErrors) {
    EXPECT_THROW(Expression::parse("sqrt", 3), ParseError);
    EXPECT_THROW(Expression::parse("sqrt 2", 3), ParseError);
    EXPECT_THROW(Expression::parse("sqrt(x1", 3), ParseError);
    EXPECT_THROW(Expression::parse("sqrt()", 3), ParseError);
    EXPECT_THROW(Expression::parse("(x1 + y1", 3), ParseError);
    EXPECT_THROW(Expression::parse("x1 y1", 3), ParseError);
    EXPECT_THROW(Expression::parse("", 3), ParseError);
}

TEST(ExpressionTest, NonIntegerExponentRejected) {
    EXPECT_THROW(Expression::parse("y1 ^ 2.5", 3), ParseError);
    EXPECT_THROW(Expression::parse("y1 ^ x1", 3), ParseError);
}

TEST(ExpressionTest, DomainErrorsAtEvaluation) {
    Expression sq = Expression::parse("sqrt(y1 - 5)", 1);
    BasePoint p{{0.0}, {1.0}};
    EXPECT_THROW(sq.eval(p), DomainError);
    JetVars jv = make_jet_vars(p, 2);
    EXPECT_THROW(sq.eval(jv), DomainError);

    Expression div = Expression::parse("1 / (x1 - x1)", 1);
    EXPECT_THROW(div.eval(p), DomainError);
}

TEST(ExpressionTest, DoublePathMatchesJetValue) {
    const std::string src = "sqrt(y1^2 + y2^2 + y3^2) + 0.1*y1 + sin(x1)*cos(x2) / (2 + exp(x3))";
    Expression ex = Expression::parse(src, 3);
    BasePoint p{{0.4, -0.9, 0.15}, {1.2, 0.5, -0.3}};
    double direct = ex.eval(p);
    JetVars jv = make_jet_vars(p, 3);
    double viajet = ex.eval(jv).value();
    EXPECT_DOUBLE_EQ(direct, viajet);
}

TEST(ExpressionTest, JetDerivativesOfParsedTree) {
    // d/dy1 of sqrt(y1^2+y2^2) = y1 / r
    Expression ex = Expression::parse("sqrt(y1^2 + y2^2)", 2);
    BasePoint p{{0.0, 0.0}, {3.0, 4.0}};
    JetVars jv = make_jet_vars(p, 2);
    Jet j = ex.eval(jv);
    std::vector<int> a(4, 0);
    a[2] = 1;
    EXPECT_NEAR(j.partial(a), 3.0 / 5.0, 1e-14);
    std::vector<int> b(4, 0);
    b[3] = 2;
    // d^2 r / dy2^2 = y1^2 / r^3
    EXPECT_NEAR(j.partial(b), 9.0 / 125.0, 1e-13);
}
