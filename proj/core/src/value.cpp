#include "gsv/value.hpp"

#include <sstream>

namespace gsv {

bool Value::operator==(const Value& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
    case Kind::Unit: return true;
    case Kind::Bool: return b_ == o.b_;
    case Kind::Int: return i_ == o.i_;
    case Kind::Loc: return loc_ == o.loc_;
    case Kind::List: return *list_ == *o.list_;
    }
    return false;
}

bool Value::operator<(const Value& o) const {
    if (kind_ != o.kind_) return static_cast<int>(kind_) < static_cast<int>(o.kind_);
    switch (kind_) {
    case Kind::Unit: return false;
    case Kind::Bool: return b_ < o.b_;
    case Kind::Int: return i_ < o.i_;
    case Kind::Loc: return loc_ < o.loc_;
    case Kind::List: {
        const auto& a = *list_;
        const auto& b = *o.list_;
        for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
            if (a[k] < b[k]) return true;
            if (b[k] < a[k]) return false;
        }
        return a.size() < b.size();
    }
    }
    return false;
}

std::string Value::str() const {
    switch (kind_) {
    case Kind::Unit: return "tt";
    case Kind::Bool: return b_ ? "true" : "false";
    case Kind::Int: return std::to_string(i_);
    case Kind::Loc: return "loc" + std::to_string(loc_.idx);
    case Kind::List: {
        if (list_->empty()) return "nil";
        std::ostringstream out;
        out << "list(";
        bool first = true;
        for (const auto& v : *list_) {
            if (!first) out << ", ";
            out << v.str();
            first = false;
        }
        out << ")";
        return out.str();
    }
    }
    return "?";
}

} // namespace gsv
