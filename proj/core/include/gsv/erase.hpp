#pragma once

#include "gsv/cmd.hpp"

namespace gsv {

// Strips every ghost construct: ghost commands disappear, loop annotations
// are dropped, fork donations are dropped, and started loop forms fold back
// into plain loops. The result runs in the plain semantics.
CmdPtr erase_annotations(const CmdPtr& c);

} // namespace gsv
