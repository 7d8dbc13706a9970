#pragma once

#include <cctype>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dhym/error.hpp"

namespace dhym {

/// Small arithmetic expression over x1..xn, y1..yn and t, compiled to postfix.
///
/// Grammar: numbers, + - * / ^ (right-associative), unary minus, parentheses,
/// the constant pi, and the functions sin cos tan exp log sqrt abs tanh atan
/// (one argument) and pow min max (two arguments).
class Expression {
public:
    Expression() = default;

    static Expression compile(const std::string& source, int n) {
        Expression e;
        e.source_ = source;
        Parser p{source, n, e.code_, 0};
        p.skip();
        p.parse_expr();
        p.skip();
        if (p.pos != source.size()) p.error("unexpected trailing input");
        int depth = 0;
        for (const Op& op : e.code_) {
            if (op.kind == Op::time) e.uses_time_ = true;
            if (op.kind == Op::constant || op.kind == Op::coord || op.kind == Op::time) ++depth;
            else if (op.kind != Op::neg && op.kind != Op::call1) --depth;
            if (depth > 64) fail(ErrorKind::config, "expression '" + source + "' is too deeply nested");
        }
        return e;
    }

    const std::string& source() const { return source_; }
    bool uses_time() const { return uses_time_; }

    /// x holds 2n coordinates ordered x1, y1, ..., xn, yn.
    double operator()(std::span<const double> x, double t) const {
        double stack[64];
        int top = 0;
        for (const Op& op : code_) {
            switch (op.kind) {
                case Op::constant: stack[top++] = op.value; break;
                case Op::coord: stack[top++] = x[op.index]; break;
                case Op::time: stack[top++] = t; break;
                case Op::neg: stack[top - 1] = -stack[top - 1]; break;
                case Op::call1: stack[top - 1] = apply1(op.index, stack[top - 1]); break;
                default: {
                    const double b = stack[--top];
                    double& a = stack[top - 1];
                    a = apply2(op.kind, op.index, a, b);
                }
            }
        }
        return stack[0];
    }

private:
    struct Op {
        enum Kind { constant, coord, time, neg, add, sub, mul, div, pow, call1, call2 } kind;
        double value = 0.0;
        int index = 0;
    };

    static constexpr const char* kUnary[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "atan"};
    static constexpr const char* kBinary[] = {"pow", "min", "max"};

    static double apply1(int f, double v) {
        switch (f) {
            case 0: return std::sin(v);
            case 1: return std::cos(v);
            case 2: return std::tan(v);
            case 3: return std::exp(v);
            case 4: return std::log(v);
            case 5: return std::sqrt(v);
            case 6: return std::abs(v);
            case 7: return std::tanh(v);
            default: return std::atan(v);
        }
    }

    static double apply2(Op::Kind k, int f, double a, double b) {
        switch (k) {
            case Op::add: return a + b;
            case Op::sub: return a - b;
            case Op::mul: return a * b;
            case Op::div: return a / b;
            case Op::pow: return std::pow(a, b);
            default:
                if (f == 0) return std::pow(a, b);
                return f == 1 ? std::min(a, b) : std::max(a, b);
        }
    }

    struct Parser {
        const std::string& s;
        int n;
        std::vector<Op>& out;
        std::size_t pos;
        int depth = 0;

        [[noreturn]] void error(const std::string& what) const {
            fail(ErrorKind::config, "expression '" + s + "': " + what + " at offset " + std::to_string(pos));
        }
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
        void push(Op::Kind k, double v = 0.0, int idx = 0) {
            out.push_back({k, v, idx});
            if (static_cast<int>(out.size()) > 4096) error("expression too long");
        }
        void parse_expr() {
            if (++depth > 24) error("nesting too deep");
            parse_term();
            for (;;) {
                if (eat('+')) {
                    parse_term();
                    push(Op::add);
                } else if (eat('-')) {
                    parse_term();
                    push(Op::sub);
                } else {
                    break;
                }
            }
            --depth;
        }
        void parse_term() {
            parse_unary();
            for (;;) {
                if (eat('*')) {
                    parse_unary();
                    push(Op::mul);
                } else if (eat('/')) {
                    parse_unary();
                    push(Op::div);
                } else {
                    break;
                }
            }
        }
        void parse_unary() {
            if (eat('-')) {
                if (++depth > 24) error("nesting too deep");
                parse_unary();
                push(Op::neg);
                --depth;
                return;
            }
            if (eat('+')) {
                parse_unary();
                return;
            }
            parse_power();
        }
        void parse_power() {
            parse_primary();
            if (eat('^')) {
                parse_unary();
                push(Op::pow);
            }
        }
        void parse_primary() {
            skip();
            if (pos >= s.size()) error("unexpected end of input");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                parse_expr();
                if (!eat(')')) error("expected ')'");
                return;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (...) {
                    error("bad number");
                }
                pos += used;
                push(Op::constant, v);
                return;
            }
            if (!std::isalpha(static_cast<unsigned char>(c))) error(std::string("unexpected character '") + c + "'");
            std::size_t start = pos;
            while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
            const std::string id = s.substr(start, pos - start);
            if (id == "pi") return push(Op::constant, std::numbers::pi);
            if (id == "t") return push(Op::time);
            if ((id[0] == 'x' || id[0] == 'y') && id.size() > 1 &&
                id.find_first_not_of("0123456789", 1) == std::string::npos) {
                const int k = std::stoi(id.substr(1));
                if (k < 1 || k > n) error("coordinate '" + id + "' out of range for n=" + std::to_string(n));
                return push(Op::coord, 0.0, 2 * (k - 1) + (id[0] == 'y' ? 1 : 0));
            }
            for (int f = 0; f < static_cast<int>(std::size(kUnary)); ++f)
                if (id == kUnary[f]) {
                    if (!eat('(')) error("expected '(' after " + id);
                    parse_expr();
                    if (!eat(')')) error("expected ')'");
                    return push(Op::call1, 0.0, f);
                }
            for (int f = 0; f < static_cast<int>(std::size(kBinary)); ++f)
                if (id == kBinary[f]) {
                    if (!eat('(')) error("expected '(' after " + id);
                    parse_expr();
                    if (!eat(',')) error("expected ',' in " + id);
                    parse_expr();
                    if (!eat(')')) error("expected ')'");
                    return push(Op::call2, 0.0, f);
                }
            error("unknown identifier '" + id + "'");
        }
    };

    std::string source_;
    std::vector<Op> code_;
    bool uses_time_ = false;
};

}  // namespace dhym
