#include "gsv/expr.hpp"

#include <algorithm>
#include <sstream>

namespace gsv {

Expr Expr::var(std::string name) {
    Expr e;
    e.kind_ = Kind::Var;
    e.name_ = std::move(name);
    return e;
}

Expr Expr::lit(Value v) {
    Expr e;
    e.kind_ = Kind::Lit;
    e.lit_ = std::move(v);
    return e;
}

Expr Expr::eq(Expr a, Expr b) {
    Expr e;
    e.kind_ = Kind::Eq;
    e.args_.push_back(std::move(a));
    e.args_.push_back(std::move(b));
    return e;
}

Expr Expr::negate(Expr a) {
    Expr e;
    e.kind_ = Kind::Not;
    e.args_.push_back(std::move(a));
    return e;
}

Expr Expr::op(std::string name, std::vector<Expr> args) {
    Expr e;
    e.kind_ = Kind::Op;
    e.name_ = std::move(name);
    e.args_ = std::move(args);
    return e;
}

bool Expr::operator==(const Expr& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
    case Kind::Var: return name_ == o.name_;
    case Kind::Lit: return lit_ == o.lit_;
    case Kind::Eq:
    case Kind::Not: return args_ == o.args_;
    case Kind::Op: return name_ == o.name_ && args_ == o.args_;
    }
    return false;
}

std::uint64_t Expr::size() const {
    std::uint64_t n = 1;
    for (const auto& a : args_) n += a.size();
    return n;
}

bool Expr::is_closed() const {
    if (kind_ == Kind::Var) return false;
    return std::all_of(args_.begin(), args_.end(), [](const Expr& a) { return a.is_closed(); });
}

void Expr::free_vars(std::vector<std::string>& out) const {
    if (kind_ == Kind::Var) {
        out.push_back(name_);
        return;
    }
    for (const auto& a : args_) a.free_vars(out);
}

bool Expr::mentions(const std::string& var) const {
    if (kind_ == Kind::Var) return name_ == var;
    return std::any_of(args_.begin(), args_.end(),
                       [&](const Expr& a) { return a.mentions(var); });
}

Expr Expr::substitute(const std::string& var, const Value& v) const {
    if (kind_ == Kind::Var) return name_ == var ? Expr::lit(v) : *this;
    if (args_.empty()) return *this;
    if (!mentions(var)) return *this;
    Expr out = *this;
    for (auto& a : out.args_) a = a.substitute(var, v);
    return out;
}

Expr Expr::substitute_expr(const std::string& var, const Expr& repl) const {
    if (kind_ == Kind::Var) return name_ == var ? repl : *this;
    if (args_.empty()) return *this;
    if (!mentions(var)) return *this;
    Expr out = *this;
    for (auto& a : out.args_) a = a.substitute_expr(var, repl);
    return out;
}

std::string Expr::str() const {
    switch (kind_) {
    case Kind::Var: return name_;
    case Kind::Lit: return lit_.str();
    case Kind::Eq: return "(" + args_[0].str() + " = " + args_[1].str() + ")";
    case Kind::Not: return "!" + args_[0].str();
    case Kind::Op: {
        if (name_ == "+" || name_ == "-" || name_ == "<") {
            return "(" + args_[0].str() + " " + name_ + " " + args_[1].str() + ")";
        }
        if (name_ == "deref") return "[" + args_[0].str() + "]";
        std::ostringstream out;
        out << name_ << "(";
        bool first = true;
        for (const auto& a : args_) {
            if (!first) out << ", ";
            out << a.str();
            first = false;
        }
        out << ")";
        return out.str();
    }
    }
    return "?";
}

std::optional<Value> eval_expr(const Expr& e) { return eval_expr(e, nullptr); }

std::optional<Value> eval_expr(const Expr& e, const DerefFn* deref) {
    switch (e.kind()) {
    case Expr::Kind::Var: return std::nullopt;
    case Expr::Kind::Lit: return e.lit_value();
    case Expr::Kind::Eq: {
        auto a = eval_expr(e.args()[0], deref);
        auto b = eval_expr(e.args()[1], deref);
        if (!a || !b) return std::nullopt;
        return Value::boolean(*a == *b);
    }
    case Expr::Kind::Not: {
        auto a = eval_expr(e.args()[0], deref);
        if (!a || !a->is_bool()) return std::nullopt;
        return Value::boolean(!a->as_bool());
    }
    case Expr::Kind::Op: {
        const auto& name = e.op_name();
        if (name == "ite") {
            if (e.args().size() != 3) return std::nullopt;
            auto c = eval_expr(e.args()[0], deref);
            if (!c || !c->is_bool()) return std::nullopt;
            return eval_expr(e.args()[c->as_bool() ? 1 : 2], deref);
        }
        std::vector<Value> vs;
        vs.reserve(e.args().size());
        for (const auto& a : e.args()) {
            auto v = eval_expr(a, deref);
            if (!v) return std::nullopt;
            vs.push_back(std::move(*v));
        }
        if (name == "+" || name == "-") {
            if (vs.size() != 2 || !vs[0].is_int() || !vs[1].is_int()) return std::nullopt;
            std::int64_t r = name == "+" ? vs[0].as_int() + vs[1].as_int()
                                         : vs[0].as_int() - vs[1].as_int();
            return Value::integer(r);
        }
        if (name == "<") {
            if (vs.size() != 2 || !vs[0].is_int() || !vs[1].is_int()) return std::nullopt;
            return Value::boolean(vs[0].as_int() < vs[1].as_int());
        }
        if (name == "append") {
            if (vs.size() != 2 || !vs[0].is_list()) return std::nullopt;
            std::vector<Value> xs = vs[0].as_list();
            xs.push_back(vs[1]);
            return Value::list(std::move(xs));
        }
        if (name == "tail") {
            if (vs.size() != 1 || !vs[0].is_list() || vs[0].as_list().empty()) return std::nullopt;
            const auto& xs = vs[0].as_list();
            return Value::list(std::vector<Value>(xs.begin() + 1, xs.end()));
        }
        if (name == "size") {
            if (vs.size() != 1 || !vs[0].is_list()) return std::nullopt;
            return Value::integer(static_cast<std::int64_t>(vs[0].as_list().size()));
        }
        if (name == "deref") {
            if (vs.size() != 1 || !vs[0].is_loc() || deref == nullptr || !*deref) {
                return std::nullopt;
            }
            return (*deref)(vs[0].as_loc());
        }
        return std::nullopt;
    }
    }
    return std::nullopt;
}

} // namespace gsv
