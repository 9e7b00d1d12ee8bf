#pragma once

#include <cstdint>

#include "gsv/cmd.hpp"

namespace gsv {

// Node count of a command, ghost constructs excluded; equals the size of
// its erasure.
std::uint64_t cmd_size(const CmdPtr& c);

// Nesting degree of loops in a command:
//   fresh loops add 2, started loops add 1, let/if take the max of their
//   parts, forked code keeps its own degree, leaves are 0.
// Started forms sit one lower because entering a loop spends one unit: the
// descent argument compares the started body against the fresh loop above it.
std::uint64_t extract_degree(const CmdPtr& c);

} // namespace gsv
