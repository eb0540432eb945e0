#pragma once

// Small arithmetic expression language used by model files for the
// coefficients a_j(x,t), b_j(x,t), the boundary map h_j(t, xi1..xin) and
// initial/target data. See docs/expressions.md for the grammar.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperprop {

enum class Func { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max, If, Bump };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

/// One AST node. For `Func::If` the condition lives in `rel`, `args[0]`,
/// `args[1]` and the branches in `args[2]`, `args[3]`.
struct ExprNode {
    enum class Kind { Number, Variable, Negate, Binary, Call };

    Kind kind = Kind::Number;
    double value = 0.0;      // Number
    std::size_t slot = 0;    // Variable: index into the environment
    BinOp op = BinOp::Add;   // Binary
    Func func = Func::Sin;   // Call
    RelOp rel = RelOp::Lt;   // Call(If)
    std::vector<NodePtr> args;
};

/// Parsed, immutable expression bound to an ordered variable environment.
///
/// Evaluation runs a compiled postfix program, so `eval` is cheap enough to
/// sit inside characteristic integration loops. Copies share the tree.
class Expr {
public:
    Expr();  // the constant 0 over an empty environment

    /// Evaluate with values given in environment order.
    double eval(std::span<const double> values) const;
    /// Evaluate with values looked up by name; every environment name must be bound.
    double eval(const std::map<std::string, double>& bindings) const;

    const std::vector<std::string>& env() const noexcept { return env_->names; }
    const NodePtr& root() const noexcept { return root_; }

    /// True if the tree references the environment variable `name`.
    bool uses(std::string_view name) const;
    /// True if the tree references no variables at all.
    bool is_constant() const noexcept;

    /// Canonical text with minimal parentheses; parses back to the same tree.
    std::string to_string() const;

    friend Expr parse(std::string_view source, const std::vector<std::string>& env);

private:
    struct Env {
        std::vector<std::string> names;
    };
    struct Instr {
        enum class Code : unsigned char {
            Push, Load, Neg, Add, Sub, Mul, Div, Pow,
            Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max, Bump,
            Cmp, JumpIfZero, Jump,
        } code;
        RelOp rel = RelOp::Lt;
        double value = 0.0;
        std::size_t slot = 0;  // Load: variable slot; jumps: target index
    };

    void compile();
    void emit(const ExprNode& n);

    std::shared_ptr<const Env> env_;
    NodePtr root_;
    std::vector<Instr> code_;
    std::size_t depth_ = 0;
    std::size_t max_depth_ = 1;
    std::vector<bool> used_;
};

/// Parse `source` against the variable names in `env`.
///
/// Precedence, tightest first: `^`, unary minus, `* /`, `+ -`, comparisons
/// (only as the first argument of `if`). Binary operators of equal
/// precedence associate to the left. Throws ParseError on syntax errors,
/// unknown identifiers and arity mismatches.
Expr parse(std::string_view source, const std::vector<std::string>& env);

/// Smooth compactly supported bump: exp(1 - 1/(1 - d^2)) with
/// d = |v - center| / radius, zero for d >= 1, one at the center.
double bump(double center, double radius, double v);

} // namespace hyperprop
