#pragma once

#include <string>
#include <vector>

#include "gsv/parser.hpp"
#include "gsv/viewshift.hpp"

namespace gsv {

struct OutlineResult {
    bool ok = true;
    std::string error; // first failure, empty on success
    std::string at;    // outline path of the failing node

    std::string str() const { return ok ? "ok" : at + ": " + error; }
};

// Checks a proof outline against a program. The outline is a JSON document
// whose "main" node mirrors the command tree: every node carries a "rule"
// naming the command form ("exp", "let", "if", "while_dec", "await", "fork",
// "ghost", "alloc", "read", "write", "new_mutex", "acquire", "release") and
// a "children" array for subcommands (let: bound+body, if: condition+branch,
// while_dec: condition, await: body, fork: child, ghost: continuation).
// Loop nodes carry the annotations that cannot be inferred: "while_dec"
// takes a bound variable name ("var") and an invariant over it ("inv");
// "await" takes the wait invariant ("inv"). Two wrapper rules may be
// inserted anywhere: "frame" (field "frame") checks its child with part of
// the state set aside, and "conseq" (field "to") weakens the state first.
//
// A checked main thread must finish with no obligations; an optional "post"
// assertion is entailed by the final state.
OutlineResult check_outline(const Program& prog, const std::string& outline_json);

// Checks one command against a pre/post pair, with the outline node given
// directly. Used heavily by tests; `post` may be empty to skip the final
// entailment.
OutlineResult check_triple(const std::vector<InvariantDecl>& table, const CmdPtr& cmd,
                           const std::string& node_json, const std::string& pre,
                           const std::string& post);

// Produces the structural outline for a command: one JSON node per command
// form with the right children layout. Loop nodes get empty "var"/"inv"
// fields that the caller must fill in before checking.
std::string outline_skeleton(const CmdPtr& cmd);

} // namespace gsv
