#pragma once

// Parser and evaluator for user-supplied metric expressions.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := number | ident | func '(' expr ')' | '(' expr ')'
//   ident  := x1..xm | y1..ym      func := sqrt | sin | cos | exp | log
//
// The same tree evaluates over plain doubles and over jets; integer powers
// use repeated multiplication in both paths so the two agree bitwise.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

namespace expr_detail {

enum class NodeKind { Number, Variable, Unary, Binary, Power };
enum class Func { Sqrt, Sin, Cos, Exp, Log };

struct Node {
    NodeKind kind;
    double number = 0.0;        // Number
    int var = 0;                // Variable: index into (x1..xm, y1..ym)
    Func func = Func::Sqrt;     // Unary
    char op = '+';              // Binary
    int exponent = 0;           // Power
    std::size_t offset = 0;     // source position, for domain-error messages
    std::shared_ptr<Node> a, b;
};

using NodePtr = std::shared_ptr<Node>;

struct Token {
    enum Kind { Num, Word, Op, End } kind;
    std::string text;
    double num = 0.0;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            tok_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '.') {
                ++pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t mark = pos_;
                ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                } else {
                    pos_ = mark; // "2e" is the number 2 followed by the word "e"
                }
            }
            tok_.kind = Token::Num;
            tok_.text = src_.substr(start, pos_ - start);
            if (tok_.text == ".") throw ParseError("malformed number", start);
            tok_.num = std::strtod(tok_.text.c_str(), nullptr);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Token::Word;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        tok_.kind = Token::Op;
        tok_.text = std::string(1, c);
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

class Parser {
public:
    Parser(const std::string& src, int dim) : lex_(src), dim_(dim) {}

    NodePtr parse() {
        NodePtr root = expr();
        if (lex_.peek().kind != Token::End)
            throw ParseError("unexpected trailing input '" + lex_.peek().text + "'",
                             lex_.peek().offset);
        return root;
    }

private:
    bool is_op(const char* s) const {
        return lex_.peek().kind == Token::Op && lex_.peek().text == s;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (is_op("+") || is_op("-")) {
            Token t = lex_.take();
            NodePtr rhs = term();
            auto node = std::make_shared<Node>();
            node->kind = NodeKind::Binary;
            node->op = t.text[0];
            node->offset = t.offset;
            node->a = lhs;
            node->b = rhs;
            lhs = node;
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = factor();
        while (is_op("*") || is_op("/")) {
            Token t = lex_.take();
            NodePtr rhs = factor();
            auto node = std::make_shared<Node>();
            node->kind = NodeKind::Binary;
            node->op = t.text[0];
            node->offset = t.offset;
            node->a = lhs;
            node->b = rhs;
            lhs = node;
        }
        return lhs;
    }

    NodePtr factor() {
        NodePtr b = base();
        if (is_op("^")) {
            Token caret = lex_.take();
            auto node = std::make_shared<Node>();
            node->kind = NodeKind::Power;
            node->offset = caret.offset;
            node->a = b;
            node->exponent = integer();
            return node;
        }
        return b;
    }

    int integer() {
        bool neg = false;
        if (is_op("-")) {
            lex_.take();
            neg = true;
        }
        Token t = lex_.peek();
        if (t.kind != Token::Num || t.text.find('.') != std::string::npos ||
            t.text.find('e') != std::string::npos || t.text.find('E') != std::string::npos)
            throw ParseError("exponent must be an integer", t.offset);
        lex_.take();
        int v = static_cast<int>(t.num);
        return neg ? -v : v;
    }

    NodePtr base() {
        Token t = lex_.peek();
        if (t.kind == Token::Num) {
            lex_.take();
            auto node = std::make_shared<Node>();
            node->kind = NodeKind::Number;
            node->number = t.num;
            node->offset = t.offset;
            return node;
        }
        if (t.kind == Token::Word) {
            lex_.take();
            if (auto f = func_of(t.text)) {
                expect("(");
                NodePtr arg = expr();
                expect(")");
                auto node = std::make_shared<Node>();
                node->kind = NodeKind::Unary;
                node->func = *f;
                node->offset = t.offset;
                node->a = arg;
                return node;
            }
            return variable(t);
        }
        if (t.kind == Token::Op && t.text == "(") {
            lex_.take();
            NodePtr inner = expr();
            expect(")");
            return inner;
        }
        if (t.kind == Token::End) throw ParseError("unexpected end of input", t.offset);
        throw ParseError("unexpected token '" + t.text + "'", t.offset);
    }

    void expect(const char* s) {
        if (!is_op(s)) {
            Token t = lex_.peek();
            std::string got = t.kind == Token::End ? "end of input" : "'" + t.text + "'";
            throw ParseError("expected '" + std::string(s) + "', found " + got, t.offset);
        }
        lex_.take();
    }

    static std::optional<Func> func_of(const std::string& w) {
        if (w == "sqrt") return Func::Sqrt;
        if (w == "sin") return Func::Sin;
        if (w == "cos") return Func::Cos;
        if (w == "exp") return Func::Exp;
        if (w == "log") return Func::Log;
        return std::nullopt;
    }

    NodePtr variable(const Token& t) {
        const std::string& w = t.text;
        if (w.size() >= 2 && (w[0] == 'x' || w[0] == 'y')) {
            bool digits = true;
            for (std::size_t i = 1; i < w.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(w[i]))) digits = false;
            if (digits) {
                int idx = std::atoi(w.c_str() + 1);
                if (idx < 1 || idx > dim_)
                    throw ParseError("identifier '" + w + "' out of range for dimension " +
                                         std::to_string(dim_),
                                     t.offset);
                auto node = std::make_shared<Node>();
                node->kind = NodeKind::Variable;
                node->var = (w[0] == 'x' ? 0 : dim_) + (idx - 1);
                node->offset = t.offset;
                return node;
            }
        }
        throw ParseError("unknown identifier '" + w + "'", t.offset);
    }

    Lexer lex_;
    int dim_;
};

inline double to_scalar(double v) { return v; }
inline double to_scalar(const Jet& v) { return v.value(); }

inline double recip_or_pow_inv(double v) { return 1.0 / v; }
inline Jet recip_or_pow_inv(const Jet& v) { return recip(v); }

template <typename T>
T pow_repeated(const T& b, int n) {
    if (n < 0) return recip_or_pow_inv(pow_repeated(b, -n));
    T r = b * 0.0 + 1.0;
    T base = b;
    int e = n;
    while (e > 0) {
        if (e & 1) r = r * base;
        if (e > 1) base = base * base;
        e >>= 1;
    }
    return r;
}

template <typename T>
T eval_node(const Node& n, const std::vector<T>& vars) {
    switch (n.kind) {
        case NodeKind::Number:
            return vars[0] * 0.0 + n.number;
        case NodeKind::Variable:
            return vars[static_cast<std::size_t>(n.var)];
        case NodeKind::Unary: {
            T a = eval_node(*n.a, vars);
            double v = to_scalar(a);
            switch (n.func) {
                case Func::Sqrt:
                    if (!(v > 0.0))
                        throw DomainError("sqrt of a non-positive value in expression at offset " +
                                          std::to_string(n.offset));
                    using std::sqrt;
                    return sqrt(a);
                case Func::Log:
                    if (!(v > 0.0))
                        throw DomainError("log of a non-positive value in expression at offset " +
                                          std::to_string(n.offset));
                    using std::log;
                    return log(a);
                case Func::Sin: { using std::sin; return sin(a); }
                case Func::Cos: { using std::cos; return cos(a); }
                case Func::Exp: { using std::exp; return exp(a); }
            }
            throw Error("unreachable function kind");
        }
        case NodeKind::Binary: {
            T a = eval_node(*n.a, vars);
            T b = eval_node(*n.b, vars);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': {
                    if (std::abs(to_scalar(b)) < 1e-300)
                        throw DomainError("division by zero in expression at offset " +
                                          std::to_string(n.offset));
                    return a / b;
                }
            }
            throw Error("unreachable operator");
        }
        case NodeKind::Power: {
            T a = eval_node(*n.a, vars);
            if (n.exponent < 0 && std::abs(to_scalar(a)) < 1e-300)
                throw DomainError("zero raised to a negative power in expression at offset " +
                                  std::to_string(n.offset));
            return pow_repeated(a, n.exponent);
        }
    }
    throw Error("unreachable node kind");
}

} // namespace expr_detail

// A parsed scalar expression in the coordinates x1..xm, y1..ym.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& src, int dim) {
        Expression e;
        e.src_ = src;
        e.dim_ = dim;
        e.root_ = expr_detail::Parser(src, dim).parse();
        return e;
    }

    const std::string& source() const { return src_; }
    int dim() const { return dim_; }
    bool empty() const { return root_ == nullptr; }

    double eval(const BasePoint& p) const {
        std::vector<double> vars;
        vars.reserve(static_cast<std::size_t>(2 * dim_));
        for (double v : p.x) vars.push_back(v);
        for (double v : p.y) vars.push_back(v);
        return expr_detail::eval_node(*root_, vars);
    }

    Jet eval(const JetVars& jv) const {
        return expr_detail::eval_node(*root_, jv.v);
    }

private:
    std::string src_;
    int dim_ = 0;
    expr_detail::NodePtr root_;
};

} // namespace finsler
