#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gsv/value.hpp"

namespace gsv {

// Pure expressions. Operators are named; the evaluator defines which names
// exist and on which argument types they are defined.
//
//   Var   x
//   Lit   v
//   Eq    e1 = e2          (structural equality on values)
//   Not   !e
//   Op    name(e...)       (+ - < append tail size ite deref)
//
// "deref" only evaluates when the caller supplies a heap reader; it is used
// by ghost annotations, never by programs that run in the plain semantics
// (the surface syntax hoists dereferences out of program expressions).
class Expr {
public:
    enum class Kind { Var, Lit, Eq, Not, Op };

    static Expr var(std::string name);
    static Expr lit(Value v);
    static Expr eq(Expr a, Expr b);
    static Expr negate(Expr a);
    static Expr op(std::string name, std::vector<Expr> args);

    Kind kind() const { return kind_; }
    const std::string& var_name() const { return name_; }
    const Value& lit_value() const { return lit_; }
    const std::string& op_name() const { return name_; }
    const std::vector<Expr>& args() const { return args_; }

    bool operator==(const Expr& o) const;

    // Node count, expression nodes included in command sizes.
    std::uint64_t size() const;

    bool is_closed() const;
    void free_vars(std::vector<std::string>& out) const;
    bool mentions(const std::string& var) const;

    Expr substitute(const std::string& var, const Value& v) const;

    std::string str() const;

    // Replaces a variable by an arbitrary expression (expressions bind
    // nothing, so this is capture-free).
    Expr substitute_expr(const std::string& var, const Expr& repl) const;

private:
    Kind kind_ = Kind::Lit;
    std::string name_;
    Value lit_;
    std::vector<Expr> args_;
};

using DerefFn = std::function<std::optional<Value>(HeapLoc)>;

// Evaluates a closed expression; nullopt when undefined (unbound variable,
// type mismatch, tail of an empty list, deref without a reader).
std::optional<Value> eval_expr(const Expr& e);
std::optional<Value> eval_expr(const Expr& e, const DerefFn* deref);

} // namespace gsv
