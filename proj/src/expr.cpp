#include "abreu/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace abreu {

struct Expression::Node {
    enum class Op { Const, Var1, Var2, Add, Sub, Mul, Div, Pow, Neg, Fun1, Fun2 };
    Op op;
    double value = 0;
    double (*f1)(double) = nullptr;
    double (*f2)(double, double) = nullptr;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression error at position " + std::to_string(pos) + ": " +
                                    what + " in \"" + s + "\"");
    }

    NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr number() {
        skip();
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
                s[end] == 'E' || ((s[end] == '+' || s[end] == '-') && end > pos &&
                                  (s[end - 1] == 'e' || s[end - 1] == 'E'))))
            ++end;
        if (end == pos) fail("expected a number");
        auto n = std::make_shared<Node>();
        n->op = Node::Op::Const;
        try {
            n->value = std::stod(s.substr(pos, end - pos));
        } catch (...) {
            fail("bad numeric literal");
        }
        pos = end;
        return n;
    }

    NodePtr ident() {
        skip();
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
            ++end;
        const std::string name = s.substr(pos, end - pos);
        pos = end;
        if (name == "x1") return make(Node::Op::Var1);
        if (name == "x2") return make(Node::Op::Var2);
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->op = Node::Op::Const;
            n->value = M_PI;
            return n;
        }

        static const std::pair<const char*, double (*)(double)> fns1[] = {
            {"sin", std::sin}, {"cos", std::cos},   {"exp", std::exp},
            {"log", std::log}, {"sqrt", std::sqrt}, {"abs", std::fabs},
        };
        static const std::pair<const char*, double (*)(double, double)> fns2[] = {
            {"min", [](double a, double b) { return std::min(a, b); }},
            {"max", [](double a, double b) { return std::max(a, b); }},
        };
        for (auto& [fname, fp] : fns1)
            if (name == fname) {
                if (!eat('(')) fail("expected ( after function name");
                NodePtr arg = expr();
                if (!eat(')')) fail("expected )");
                auto n = std::make_shared<Node>();
                n->op = Node::Op::Fun1;
                n->f1 = fp;
                n->a = arg;
                return n;
            }
        for (auto& [fname, fp] : fns2)
            if (name == fname) {
                if (!eat('(')) fail("expected ( after function name");
                NodePtr a = expr();
                if (!eat(',')) fail("expected , between arguments");
                NodePtr b = expr();
                if (!eat(')')) fail("expected )");
                auto n = std::make_shared<Node>();
                n->op = Node::Op::Fun2;
                n->f2 = fp;
                n->a = a;
                n->b = b;
                return n;
            }
        fail("unknown identifier \"" + name + "\"");
    }

    NodePtr primary() {
        skip();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("expected )");
            return e;
        }
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        fail("expected a value");
    }

    NodePtr unary() {
        if (eat('-')) return make(Node::Op::Neg, unary());
        if (eat('+')) return unary();
        return factor_base();
    }

    NodePtr factor_base() {
        NodePtr base = primary();
        if (eat('^')) return make(Node::Op::Pow, base, unary());
        return base;
    }

    NodePtr term() {
        NodePtr a = unary();
        while (true) {
            if (eat('*'))
                a = make(Node::Op::Mul, a, unary());
            else if (eat('/'))
                a = make(Node::Op::Div, a, unary());
            else
                return a;
        }
    }

    NodePtr expr() {
        NodePtr a = term();
        while (true) {
            if (eat('+'))
                a = make(Node::Op::Add, a, term());
            else if (eat('-'))
                a = make(Node::Op::Sub, a, term());
            else
                return a;
        }
    }
};

double eval_node(const Node& n, double x1, double x2) {
    switch (n.op) {
        case Node::Op::Const: return n.value;
        case Node::Op::Var1: return x1;
        case Node::Op::Var2: return x2;
        case Node::Op::Add: return eval_node(*n.a, x1, x2) + eval_node(*n.b, x1, x2);
        case Node::Op::Sub: return eval_node(*n.a, x1, x2) - eval_node(*n.b, x1, x2);
        case Node::Op::Mul: return eval_node(*n.a, x1, x2) * eval_node(*n.b, x1, x2);
        case Node::Op::Div: return eval_node(*n.a, x1, x2) / eval_node(*n.b, x1, x2);
        case Node::Op::Pow: return std::pow(eval_node(*n.a, x1, x2), eval_node(*n.b, x1, x2));
        case Node::Op::Neg: return -eval_node(*n.a, x1, x2);
        case Node::Op::Fun1: return n.f1(eval_node(*n.a, x1, x2));
        case Node::Op::Fun2: return n.f2(eval_node(*n.a, x1, x2), eval_node(*n.b, x1, x2));
    }
    return 0;
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing characters");
    e.text_ = text;
    return e;
}

double Expression::eval(double x1, double x2) const {
    if (!root_) throw std::logic_error("empty expression");
    return eval_node(*root_, x1, x2);
}

} // namespace abreu
