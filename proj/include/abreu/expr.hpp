#pragma once

#include <memory>
#include <string>

namespace abreu {

/// Tiny arithmetic expression over the variables x1, x2.
/// Grammar: + - * / ^ (right-assoc), unary minus, parentheses, the constant
/// pi, and the functions sin cos exp log sqrt abs min max.
class Expression {
public:
    /// Throws std::invalid_argument on parse errors.
    static Expression parse(const std::string& text);

    double eval(double x1, double x2) const;
    const std::string& text() const { return text_; }

    Expression() = default;

    struct Node; // parse-tree node, defined in the implementation

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace abreu
