#include "hyperprop/expr.hpp"

#include "hyperprop/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace hyperprop {

namespace {

struct FuncInfo {
    std::string_view name;
    Func func;
    std::size_t arity;
};

constexpr std::array<FuncInfo, 10> kFuncs{{
    {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},
    {"exp", Func::Exp, 1},
    {"log", Func::Log, 1},
    {"abs", Func::Abs, 1},
    {"sqrt", Func::Sqrt, 1},
    {"min", Func::Min, 2},
    {"max", Func::Max, 2},
    {"if", Func::If, 3},
    {"bump", Func::Bump, 3},
}};

const FuncInfo* find_func(std::string_view name) {
    for (const auto& f : kFuncs)
        if (f.name == name) return &f;
    return nullptr;
}

std::string_view func_name(Func f) {
    for (const auto& info : kFuncs)
        if (info.func == f) return info.name;
    return "?";
}

std::string_view rel_text(RelOp r) {
    switch (r) {
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    }
    return "?";
}

NodePtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->value = v;
    return n;
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& env) : src_(src), env_(env) {}

    NodePtr parse_all() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    NodePtr binary(BinOp op, NodePtr lhs, NodePtr rhs) {
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Binary;
        n->op = op;
        n->args = {std::move(lhs), std::move(rhs)};
        return n;
    }

    NodePtr negate(NodePtr operand) {
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Negate;
        n->args = {std::move(operand)};
        return n;
    }

    NodePtr parse_sum() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = binary(BinOp::Add, lhs, parse_term());
            else if (accept('-')) lhs = binary(BinOp::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = binary(BinOp::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = binary(BinOp::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        auto lhs = parse_primary();
        while (accept('^')) lhs = binary(BinOp::Pow, lhs, parse_exponent());
        return lhs;
    }

    // The operand right of '^' may carry its own sign: 2^-x.
    NodePtr parse_exponent() {
        if (accept('-')) return negate(parse_exponent());
        return parse_primary();
    }

    RelOp parse_rel() {
        skip_ws();
        auto rest = src_.substr(pos_);
        auto take = [&](std::string_view tok, RelOp r) {
            if (rest.substr(0, tok.size()) == tok) {
                pos_ += tok.size();
                return true;
            }
            (void)r;
            return false;
        };
        if (take("<=", RelOp::Le)) return RelOp::Le;
        if (take(">=", RelOp::Ge)) return RelOp::Ge;
        if (take("==", RelOp::Eq)) return RelOp::Eq;
        if (take("!=", RelOp::Ne)) return RelOp::Ne;
        if (take("<", RelOp::Lt)) return RelOp::Lt;
        if (take(">", RelOp::Gt)) return RelOp::Gt;
        fail("expected comparison operator");
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_sum();
            expect(')');
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || ptr != src_.data() + pos_) fail_at("malformed number", start);
        return make_number(v);
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        skip_ws();
        bool call = pos_ < src_.size() && src_[pos_] == '(';
        if (!call) {
            auto it = std::find(env_.begin(), env_.end(), name);
            if (it == env_.end()) fail_at("unknown identifier `" + name + "`", start);
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Variable;
            n->slot = static_cast<std::size_t>(it - env_.begin());
            return n;
        }

        const FuncInfo* info = find_func(name);
        if (!info) fail_at("unknown identifier `" + name + "`", start);
        ++pos_;  // '('

        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Call;
        n->func = info->func;
        if (info->func == Func::If) {
            n->args.push_back(parse_sum());
            n->rel = parse_rel();
            n->args.push_back(parse_sum());
        } else {
            n->args.push_back(parse_sum());
        }
        std::size_t given = 1;
        while (accept(',')) {
            n->args.push_back(parse_sum());
            ++given;
        }
        expect(')');
        if (given != info->arity)
            fail_at("function `" + name + "` expects " + std::to_string(info->arity) + " argument(s), got " +
                        std::to_string(given),
                    start);
        return n;
    }

    std::string_view src_;
    const std::vector<std::string>& env_;
    std::size_t pos_ = 0;
};

// Printing precedence levels.
constexpr int kSum = 1, kTerm = 2, kUnary = 3, kPower = 4, kPrimary = 5;

int level(const ExprNode& n) {
    switch (n.kind) {
    case ExprNode::Kind::Number: return kPrimary;
    case ExprNode::Kind::Variable: return kPrimary;
    case ExprNode::Kind::Call: return kPrimary;
    case ExprNode::Kind::Negate: return kUnary;
    case ExprNode::Kind::Binary:
        switch (n.op) {
        case BinOp::Add:
        case BinOp::Sub: return kSum;
        case BinOp::Mul:
        case BinOp::Div: return kTerm;
        case BinOp::Pow: return kPower;
        }
    }
    return kPrimary;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

void print(const ExprNode& n, const std::vector<std::string>& env, std::string& out);

void print_at(const ExprNode& n, int min_level, const std::vector<std::string>& env, std::string& out) {
    if (level(n) < min_level) {
        out += '(';
        print(n, env, out);
        out += ')';
    } else {
        print(n, env, out);
    }
}

// Operand to the right of '^': a primary or a signed exponent.
void print_exponent(const ExprNode& n, const std::vector<std::string>& env, std::string& out) {
    if (n.kind == ExprNode::Kind::Negate) {
        out += '-';
        print_exponent(*n.args[0], env, out);
    } else {
        print_at(n, kPrimary, env, out);
    }
}

void print(const ExprNode& n, const std::vector<std::string>& env, std::string& out) {
    switch (n.kind) {
    case ExprNode::Kind::Number:
        if (n.value < 0 || std::signbit(n.value)) {
            out += "(-" + format_number(-n.value) + ")";
        } else {
            out += format_number(n.value);
        }
        return;
    case ExprNode::Kind::Variable:
        out += env[n.slot];
        return;
    case ExprNode::Kind::Negate:
        out += '-';
        print_at(*n.args[0], kUnary, env, out);
        return;
    case ExprNode::Kind::Binary: {
        int me = level(n);
        if (n.op == BinOp::Pow) {
            print_at(*n.args[0], kPower, env, out);
            out += '^';
            print_exponent(*n.args[1], env, out);
            return;
        }
        print_at(*n.args[0], me, env, out);
        switch (n.op) {
        case BinOp::Add: out += " + "; break;
        case BinOp::Sub: out += " - "; break;
        case BinOp::Mul: out += "*"; break;
        case BinOp::Div: out += "/"; break;
        case BinOp::Pow: break;
        }
        print_at(*n.args[1], me + 1, env, out);
        return;
    }
    case ExprNode::Kind::Call:
        out += func_name(n.func);
        out += '(';
        if (n.func == Func::If) {
            print(*n.args[0], env, out);
            out += ' ';
            out += rel_text(n.rel);
            out += ' ';
            print(*n.args[1], env, out);
            out += ", ";
            print(*n.args[2], env, out);
            out += ", ";
            print(*n.args[3], env, out);
        } else {
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print(*n.args[i], env, out);
            }
        }
        out += ')';
        return;
    }
}

bool compare(RelOp r, double a, double b) {
    switch (r) {
    case RelOp::Lt: return a < b;
    case RelOp::Le: return a <= b;
    case RelOp::Gt: return a > b;
    case RelOp::Ge: return a >= b;
    case RelOp::Eq: return a == b;
    case RelOp::Ne: return a != b;
    }
    return false;
}

} // namespace

double bump(double center, double radius, double v) {
    if (!(radius > 0)) throw DomainError("bump: radius must be positive");
    double d = std::abs(v - center) / radius;
    if (d >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - d * d));
}

Expr::Expr() : env_(std::make_shared<Env>()), root_(make_number(0.0)) { compile(); }

Expr parse(std::string_view source, const std::vector<std::string>& env) {
    Parser p(source, env);
    Expr e;
    e.env_ = std::make_shared<Expr::Env>(Expr::Env{env});
    e.root_ = p.parse_all();
    e.compile();
    return e;
}

bool Expr::uses(std::string_view name) const {
    const auto& names = env_->names;
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return false;
    return used_[static_cast<std::size_t>(it - names.begin())];
}

bool Expr::is_constant() const noexcept {
    return std::none_of(used_.begin(), used_.end(), [](bool b) { return b; });
}

std::string Expr::to_string() const {
    std::string out;
    print(*root_, env_->names, out);
    return out;
}

void Expr::compile() {
    code_.clear();
    used_.assign(env_->names.size(), false);
    depth_ = 0;
    max_depth_ = 1;
    emit(*root_);
}

void Expr::emit(const ExprNode& n) {
    using Code = Instr::Code;
    auto push = [&](Instr in) {
        code_.push_back(in);
    };
    auto grow = [&] {
        ++depth_;
        max_depth_ = std::max(max_depth_, depth_);
    };
    switch (n.kind) {
    case ExprNode::Kind::Number:
        push({Code::Push, RelOp::Lt, n.value, 0});
        grow();
        return;
    case ExprNode::Kind::Variable:
        push({Code::Load, RelOp::Lt, 0.0, n.slot});
        used_[n.slot] = true;
        grow();
        return;
    case ExprNode::Kind::Negate:
        emit(*n.args[0]);
        push({Code::Neg});
        return;
    case ExprNode::Kind::Binary: {
        emit(*n.args[0]);
        emit(*n.args[1]);
        Code c = Code::Add;
        switch (n.op) {
        case BinOp::Add: c = Code::Add; break;
        case BinOp::Sub: c = Code::Sub; break;
        case BinOp::Mul: c = Code::Mul; break;
        case BinOp::Div: c = Code::Div; break;
        case BinOp::Pow: c = Code::Pow; break;
        }
        push({c});
        --depth_;
        return;
    }
    case ExprNode::Kind::Call: {
        if (n.func == Func::If) {
            emit(*n.args[0]);
            emit(*n.args[1]);
            push({Code::Cmp, n.rel});
            --depth_;
            std::size_t branch = code_.size();
            push({Code::JumpIfZero});
            --depth_;
            emit(*n.args[2]);
            std::size_t skip = code_.size();
            push({Code::Jump});
            --depth_;
            code_[branch].slot = code_.size();
            emit(*n.args[3]);
            code_[skip].slot = code_.size();
            return;
        }
        for (const auto& a : n.args) emit(*a);
        Code c = Code::Sin;
        switch (n.func) {
        case Func::Sin: c = Code::Sin; break;
        case Func::Cos: c = Code::Cos; break;
        case Func::Exp: c = Code::Exp; break;
        case Func::Log: c = Code::Log; break;
        case Func::Abs: c = Code::Abs; break;
        case Func::Sqrt: c = Code::Sqrt; break;
        case Func::Min: c = Code::Min; break;
        case Func::Max: c = Code::Max; break;
        case Func::Bump: c = Code::Bump; break;
        case Func::If: break;
        }
        push({c});
        depth_ -= n.args.size() - 1;
        return;
    }
    }
}

double Expr::eval(std::span<const double> values) const {
    using Code = Instr::Code;
    if (values.size() < env_->names.size())
        throw Error("expression needs " + std::to_string(env_->names.size()) + " bound variables, got " +
                    std::to_string(values.size()));

    std::array<double, 32> small{};
    std::vector<double> big;
    double* st = small.data();
    if (max_depth_ > small.size()) {
        big.resize(max_depth_);
        st = big.data();
    }
    std::size_t sp = 0;
    const std::size_t ncode = code_.size();
    for (std::size_t pc = 0; pc < ncode; ++pc) {
        const Instr& in = code_[pc];
        switch (in.code) {
        case Code::Push: st[sp++] = in.value; break;
        case Code::Load: st[sp++] = values[in.slot]; break;
        case Code::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Code::Add: --sp; st[sp - 1] += st[sp]; break;
        case Code::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Code::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Code::Div:
            --sp;
            if (st[sp] == 0.0) throw DomainError("division by zero");
            st[sp - 1] /= st[sp];
            break;
        case Code::Pow: {
            --sp;
            double r = std::pow(st[sp - 1], st[sp]);
            if (std::isnan(r)) throw DomainError("power with negative base and non-integer exponent");
            if (std::isinf(r) && st[sp - 1] == 0.0) throw DomainError("zero raised to a negative power");
            st[sp - 1] = r;
            break;
        }
        case Code::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Code::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        case Code::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        case Code::Log:
            if (!(st[sp - 1] > 0.0)) throw DomainError("log of non-positive argument");
            st[sp - 1] = std::log(st[sp - 1]);
            break;
        case Code::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
        case Code::Sqrt:
            if (st[sp - 1] < 0.0) throw DomainError("sqrt of negative argument");
            st[sp - 1] = std::sqrt(st[sp - 1]);
            break;
        case Code::Min: --sp; st[sp - 1] = std::min(st[sp - 1], st[sp]); break;
        case Code::Max: --sp; st[sp - 1] = std::max(st[sp - 1], st[sp]); break;
        case Code::Bump:
            sp -= 2;
            st[sp - 1] = bump(st[sp - 1], st[sp], st[sp + 1]);
            break;
        case Code::Cmp:
            --sp;
            st[sp - 1] = compare(in.rel, st[sp - 1], st[sp]) ? 1.0 : 0.0;
            break;
        case Code::JumpIfZero:
            --sp;
            if (st[sp] == 0.0) pc = in.slot - 1;
            break;
        case Code::Jump: pc = in.slot - 1; break;
        }
    }
    double r = st[0];
    if (std::isnan(r)) throw DomainError("expression evaluated to NaN");
    return r;
}

double Expr::eval(const std::map<std::string, double>& bindings) const {
    const auto& names = env_->names;
    std::array<double, 16> small{};
    std::vector<double> big;
    std::span<double> vals;
    if (names.size() <= small.size()) {
        vals = std::span<double>(small.data(), names.size());
    } else {
        big.resize(names.size());
        vals = big;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto it = bindings.find(names[i]);
        if (it == bindings.end()) throw Error("unbound variable `" + names[i] + "`");
        vals[i] = it->second;
    }
    return eval(std::span<const double>(vals.data(), vals.size()));
}

} // namespace hyperprop
