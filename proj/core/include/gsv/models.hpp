#pragma once

#include <optional>
#include <string>

#include "gsv/logheap.hpp"

namespace gsv {

// Removes the resources an assertion describes from a heap, returning the
// remainder, or nullopt when the heap does not contain them. Expressions in
// the assertion must evaluate to values (optionally through `reader` for
// ghost dereferences). Choice points (wildcards, disjunctions, obligation-set
// picks) backtrack, so a carve fails only if no reading of the assertion
// fits the heap.
std::optional<LogHeap> carve(const LogHeap& h, const AssertionPtr& a,
                             std::string* why = nullptr, const DerefFn* reader = nullptr);

// The heap is exactly what the assertion describes: carve succeeds with an
// empty remainder.
bool models(const LogHeap& h, const AssertionPtr& a, std::string* why = nullptr,
            const DerefFn* reader = nullptr);

bool assertion_has_obs(const AssertionPtr& a);

} // namespace gsv
