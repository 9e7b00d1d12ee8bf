#pragma once

#include <string>

#include "gsv/cmd.hpp"

namespace gsv {

struct Program;

// Canonical concrete syntax. Re-parsing printed output yields the same AST;
// runtime-only forms (started loops, gate ghosts, location and list literals)
// print in a debug notation that is not part of the surface grammar.
std::string print_cmd(const Cmd& c);
std::string print_program(const Program& p);

} // namespace gsv
