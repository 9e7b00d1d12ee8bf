#include "gsv/foundations.hpp"

namespace gsv {

std::string Obligation::str() const {
    if (is_signal())
        return "sig(" + std::to_string(std::get<SignalId>(target)) + ", " + std::to_string(level) + ")";
    return "mut(loc" + std::to_string(std::get<HeapLoc>(target).idx) + ", " + std::to_string(level) + ")";
}

bool level_below_bag(Level lev, const ObligationBag& bag) {
    for (auto& [ob, n] : bag.entries()) {
        (void)n;
        if (!(lev < ob.level)) return false;
    }
    return true;
}

std::string obligation_bag_str(const ObligationBag& bag) {
    std::string out = "{";
    bool first = true;
    for (auto& [ob, n] : bag.entries()) {
        for (std::uint64_t i = 0; i < n; ++i) {
            if (!first) out += ", ";
            out += ob.str();
            first = false;
        }
    }
    return out + "}";
}

} // namespace gsv
