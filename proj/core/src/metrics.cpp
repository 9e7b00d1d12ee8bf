#include "gsv/metrics.hpp"

#include <algorithm>

namespace gsv {

std::uint64_t cmd_size(const CmdPtr& c) { return c ? c->size() : 0; }

std::uint64_t extract_degree(const CmdPtr& c) {
    if (!c) return 0;
    switch (c->kind) {
    case Cmd::Kind::While: return extract_degree(c->c1) + 2;
    case Cmd::Kind::WhileDecStarted: return extract_degree(c->c1) + 1;
    case Cmd::Kind::AwaitStarted: return extract_degree(c->c1) + 1;
    case Cmd::Kind::Let:
    case Cmd::Kind::If: return std::max(extract_degree(c->c1), extract_degree(c->c2));
    case Cmd::Kind::Fork: return extract_degree(c->c1);
    case Cmd::Kind::Ghost: return extract_degree(c->c1);
    default: return 0;
    }
}

} // namespace gsv
