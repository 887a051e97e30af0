#include "thermoflux/expression.hpp"

#include "thermoflux/error.hpp"
#include "thermoflux/kv.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace thermoflux {

struct Expression::Node {
    enum class Op { Num, X, Y, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs };
    Op op = Op::Num;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

// Grammar (lowest precedence first):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?
//   atom    := number | x | y | pi | func '(' sum ')' | '(' sum ')'
class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    int run() {
        const int root = sum();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return root;
    }

    std::vector<Node> nodes;
    bool uses_xy = false;

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression '" + s_ + "', column " + std::to_string(pos_ + 1) + ": " + what, 0);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Op op, int lhs = -1, int rhs = -1, double value = 0.0) {
        nodes.push_back({op, value, lhs, rhs});
        return static_cast<int>(nodes.size()) - 1;
    }

    int sum() {
        int lhs = product();
        for (;;) {
            if (accept('+')) {
                lhs = add(Op::Add, lhs, product());
            } else if (accept('-')) {
                lhs = add(Op::Sub, lhs, product());
            } else {
                return lhs;
            }
        }
    }

    int product() {
        int lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = add(Op::Mul, lhs, unary());
            } else if (accept('/')) {
                lhs = add(Op::Div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    int unary() {
        if (accept('-')) {
            return add(Op::Neg, unary());
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    int power() {
        const int base = atom();
        if (accept('^')) {
            return add(Op::Pow, base, unary());
        }
        return base;
    }

    int atom() {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of expression");
        }
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = sum();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            return add(Op::Num, -1, -1, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) {
                ++end;
            }
            const std::string name = s_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "x" || name == "y") {
                uses_xy = true;
                return add(name == "x" ? Op::X : Op::Y);
            }
            if (name == "pi") {
                return add(Op::Num, -1, -1, std::numbers::pi);
            }
            Op op;
            if (name == "sin") {
                op = Op::Sin;
            } else if (name == "cos") {
                op = Op::Cos;
            } else if (name == "exp") {
                op = Op::Exp;
            } else if (name == "abs") {
                op = Op::Abs;
            } else {
                pos_ -= name.size();
                fail("unknown name '" + name + "'");
            }
            if (!accept('(')) {
                fail("expected '(' after " + name);
            }
            const int arg = sum();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return add(op, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

double eval(const std::vector<Node>& nodes, int i, double x, double y) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
    case Op::Num: return n.value;
    case Op::X: return x;
    case Op::Y: return y;
    case Op::Add: return eval(nodes, n.lhs, x, y) + eval(nodes, n.rhs, x, y);
    case Op::Sub: return eval(nodes, n.lhs, x, y) - eval(nodes, n.rhs, x, y);
    case Op::Mul: return eval(nodes, n.lhs, x, y) * eval(nodes, n.rhs, x, y);
    case Op::Div: return eval(nodes, n.lhs, x, y) / eval(nodes, n.rhs, x, y);
    case Op::Pow: return std::pow(eval(nodes, n.lhs, x, y), eval(nodes, n.rhs, x, y));
    case Op::Neg: return -eval(nodes, n.lhs, x, y);
    case Op::Sin: return std::sin(eval(nodes, n.lhs, x, y));
    case Op::Cos: return std::cos(eval(nodes, n.lhs, x, y));
    case Op::Exp: return std::exp(eval(nodes, n.lhs, x, y));
    case Op::Abs: return std::abs(eval(nodes, n.lhs, x, y));
    }
    return 0.0;
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.run();
    e.constant_ = !p.uses_xy;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(p.nodes));
    e.source_ = text;
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{{Op::Num, value, -1, -1}});
    e.root_ = 0;
    e.source_ = format_number(value);
    return e;
}

double Expression::operator()(double x, double y) const {
    if (!nodes_) {
        return 0.0;
    }
    return eval(*nodes_, root_, x, y);
}

} // namespace thermoflux
