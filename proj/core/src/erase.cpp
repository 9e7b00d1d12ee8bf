#include "gsv/erase.hpp"

namespace gsv {

CmdPtr erase_annotations(const CmdPtr& c) {
    if (!c) return c;
    switch (c->kind) {
    case Cmd::Kind::Exp:
    case Cmd::Kind::Alloc:
    case Cmd::Kind::Read:
    case Cmd::Kind::Write:
    case Cmd::Kind::NewMutex:
    case Cmd::Kind::Acquire:
    case Cmd::Kind::Release: return c;
    case Cmd::Kind::Let: {
        CmdPtr c1 = erase_annotations(c->c1);
        CmdPtr c2 = erase_annotations(c->c2);
        if (c1 == c->c1 && c2 == c->c2) return c;
        return Cmd::let_(c->binder, std::move(c1), std::move(c2));
    }
    case Cmd::Kind::If: {
        CmdPtr c1 = erase_annotations(c->c1);
        CmdPtr c2 = erase_annotations(c->c2);
        if (c1 == c->c1 && c2 == c->c2) return c;
        return Cmd::if_(std::move(c1), std::move(c2));
    }
    case Cmd::Kind::While: {
        CmdPtr cond = erase_annotations(c->c1);
        if (cond == c->c1 && c->anno.kind == LoopAnno::Kind::None) return c;
        return Cmd::while_(std::move(cond));
    }
    case Cmd::Kind::Fork: {
        CmdPtr child = erase_annotations(c->c1);
        if (child == c->c1 && !c->give) return c;
        return Cmd::fork(std::move(child));
    }
    case Cmd::Kind::Ghost: return erase_annotations(c->c1);
    case Cmd::Kind::WhileDecStarted: return Cmd::while_(erase_annotations(c->c1));
    case Cmd::Kind::AwaitStarted:
        return Cmd::while_(erase_annotations(await_expansion(c->e1, c->c1)));
    }
    return c;
}

} // namespace gsv
