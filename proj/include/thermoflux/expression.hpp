#pragma once

// Scalar expressions in x and y: numbers, pi, + - * / ^, unary minus,
// parentheses and the functions sin, cos, exp, abs.

#include <memory>
#include <string>
#include <vector>

namespace thermoflux {

class Expression {
public:
    /// Throws ParseError with the column of the offending token.
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double operator()(double x, double y) const;
    /// True when the expression does not mention x or y.
    bool is_constant() const { return constant_; }
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
    bool constant_ = true;
    std::string source_;
};

} // namespace thermoflux
