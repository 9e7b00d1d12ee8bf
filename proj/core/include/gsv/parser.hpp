#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gsv/assertion.hpp"
#include "gsv/cmd.hpp"

namespace gsv {

struct InvariantDecl {
    std::string name;
    AssertionPtr body;
};

struct Program {
    std::vector<InvariantDecl> invariants;
    CmdPtr main;
};

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(int line_, int col_, const std::string& msg)
        : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
          line(line_),
          col(col_) {}
};

// Parses a full program: invariant declarations followed by one command.
// Sugar is expanded here: `c1; c2` becomes a let, `with .. await ..` becomes
// an annotated loop, and dereferences inside program expressions are hoisted
// into reads. Throws ParseError on malformed input.
Program parse_program(const std::string& text);

// Parses a single assertion (used by proof outlines). Invariant names are
// resolved against `table`.
AssertionPtr parse_assertion_text(const std::string& text,
                                  const std::vector<InvariantDecl>& table);

// Parses a single expression (wildcard not allowed).
Expr parse_expr_text(const std::string& text);

} // namespace gsv
