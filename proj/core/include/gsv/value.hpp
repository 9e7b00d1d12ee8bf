#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gsv/foundations.hpp"

namespace gsv {

// Runtime values: unit, booleans, integers, heap locations, finite lists.
class Value {
public:
    enum class Kind { Unit, Bool, Int, Loc, List };

    Value() : kind_(Kind::Unit) {}

    static Value unit() { return Value(); }
    static Value boolean(bool b) { Value v; v.kind_ = Kind::Bool; v.b_ = b; return v; }
    static Value integer(std::int64_t i) { Value v; v.kind_ = Kind::Int; v.i_ = i; return v; }
    static Value loc(HeapLoc l) { Value v; v.kind_ = Kind::Loc; v.loc_ = l; return v; }
    static Value list(std::vector<Value> xs) {
        Value v;
        v.kind_ = Kind::List;
        v.list_ = std::make_shared<const std::vector<Value>>(std::move(xs));
        return v;
    }
    static Value nil() { return list({}); }

    Kind kind() const { return kind_; }
    bool is_unit() const { return kind_ == Kind::Unit; }
    bool is_bool() const { return kind_ == Kind::Bool; }
    bool is_int() const { return kind_ == Kind::Int; }
    bool is_loc() const { return kind_ == Kind::Loc; }
    bool is_list() const { return kind_ == Kind::List; }

    bool as_bool() const { return b_; }
    std::int64_t as_int() const { return i_; }
    HeapLoc as_loc() const { return loc_; }
    const std::vector<Value>& as_list() const { return *list_; }

    bool operator==(const Value& o) const;
    bool operator<(const Value& o) const;

    std::string str() const;

private:
    Kind kind_;
    bool b_ = false;
    std::int64_t i_ = 0;
    HeapLoc loc_{};
    std::shared_ptr<const std::vector<Value>> list_;
};

} // namespace gsv
