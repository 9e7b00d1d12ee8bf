#include "gsv/printer.hpp"

#include <sstream>

#include "gsv/assertion.hpp"
#include "gsv/parser.hpp"

namespace gsv {

namespace {

constexpr std::size_t kInlineLimit = 72;

bool fits_inline(const std::string& s) {
    return s.size() <= kInlineLimit && s.find('\n') == std::string::npos;
}

std::string ghost_str(const GhostCmd& g) {
    switch (g.kind) {
    case GhostCmd::Kind::NewSignal:
        return "new_signal " + g.a.str() + " as " + g.binder;
    case GhostCmd::Kind::SetSignal: return "set_signal " + g.a.str();
    case GhostCmd::Kind::MutInit:
        return "mut_init " + g.a.str() + " at " + g.b.str() + " with " + g.inv_name;
    case GhostCmd::Kind::AllocSignalId: return "alloc_signal_id as " + g.binder;
    case GhostCmd::Kind::InitSignal:
        return "init_signal " + g.a.str() + " at " + g.b.str() + " as " + g.binder;
    case GhostCmd::Kind::AwaitGate: {
        std::ostringstream out;
        out << "await_gate[";
        bool first = true;
        for (const auto& it : g.gate_items) {
            if (!first) out << ", ";
            out << "sig(" << it.id.str() << ", " << it.level.str() << ")";
            first = false;
        }
        out << "](" << g.gate_mutex.str() << ", " << g.a.str() << ")";
        return out.str();
    }
    }
    return "?";
}

struct Printer {
    std::ostringstream out;

    void line_break(int ind) {
        out << "\n";
        for (int i = 0; i < ind; ++i) out << "  ";
    }

    std::string render(const Cmd& c, int ind) {
        Printer p;
        p.cmd(c, ind);
        return p.out.str();
    }

    // Emits `(c)`, inline when short, else as an indented block.
    void paren_block(const Cmd& c, int ind) {
        std::string body = render(c, ind + 1);
        if (fits_inline(body)) {
            out << "(" << body << ")";
            return;
        }
        out << "(";
        line_break(ind + 1);
        out << body;
        line_break(ind);
        out << ")";
    }

    void give_items(const AssertionPtr& give, int ind) {
        std::vector<AssertionPtr> atoms;
        flatten_star(give, atoms);
        std::ostringstream inl;
        bool first = true;
        for (const auto& a : atoms) {
            if (!first) inl << ", ";
            inl << a->str();
            first = false;
        }
        std::string items = inl.str();
        if (fits_inline(items)) {
            out << "{ " << items << " }";
            return;
        }
        out << "{";
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            line_break(ind + 1);
            out << atoms[i]->str();
            if (i + 1 < atoms.size()) out << ",";
        }
        line_break(ind);
        out << "}";
    }

    void cmd(const Cmd& c, int ind) {
        switch (c.kind) {
        case Cmd::Kind::Exp: out << c.e1.str(); return;
        case Cmd::Kind::Let: {
            if (c.binder == "_") {
                bool wrap = c.c1->kind == Cmd::Kind::Let || c.c1->kind == Cmd::Kind::Ghost;
                if (wrap) {
                    paren_block(*c.c1, ind);
                } else {
                    cmd(*c.c1, ind);
                }
                out << ";";
                line_break(ind);
                cmd(*c.c2, ind);
                return;
            }
            out << "let " << c.binder << " = ";
            paren_block(*c.c1, ind);
            out << " in";
            line_break(ind);
            cmd(*c.c2, ind);
            return;
        }
        case Cmd::Kind::If: {
            out << "if ";
            paren_block(*c.c1, ind);
            out << " then ";
            paren_block(*c.c2, ind);
            return;
        }
        case Cmd::Kind::While: {
            if (c.anno.kind == LoopAnno::Kind::Await) {
                out << "with " << c.anno.mutex.str() << " await ";
                paren_block(*c.anno.body, ind);
                out << " awaiting { ";
                bool first = true;
                for (const auto& s : c.anno.signals) {
                    if (!first) out << ", ";
                    out << "sig(" << s.id.str() << ", " << s.level.str() << ")";
                    first = false;
                }
                out << " }";
                return;
            }
            out << "while ";
            paren_block(*c.c1, ind);
            out << " do skip";
            if (c.anno.kind == LoopAnno::Kind::Dec) out << " dec " << c.anno.dec.str();
            return;
        }
        case Cmd::Kind::Fork: {
            out << "fork ";
            paren_block(*c.c1, ind);
            if (c.give) {
                out << " giving ";
                give_items(c.give, ind);
            }
            return;
        }
        case Cmd::Kind::Alloc: out << "cons(" << c.e1.str() << ")"; return;
        case Cmd::Kind::Read: out << "[" << c.e1.str() << "]"; return;
        case Cmd::Kind::Write:
            out << "[" << c.e1.str() << "] := " << c.e2.str();
            return;
        case Cmd::Kind::NewMutex: out << "new_mutex"; return;
        case Cmd::Kind::Acquire: out << "acquire " << c.e1.str(); return;
        case Cmd::Kind::Release: out << "release " << c.e1.str(); return;
        case Cmd::Kind::Ghost:
            out << "ghost " << ghost_str(c.ghost) << ";";
            line_break(ind);
            cmd(*c.c1, ind);
            return;
        case Cmd::Kind::WhileDecStarted:
            out << "whiledec[" << c.bound << "] ";
            paren_block(*c.c1, ind);
            return;
        case Cmd::Kind::AwaitStarted: {
            out << "awaiting[";
            bool first = true;
            for (const auto& it : c.await_items) {
                if (!first) out << ", ";
                out << "sig(" << it.id.str() << ", " << it.level.str() << ")";
                first = false;
            }
            out << "] with " << c.e1.str() << " ";
            paren_block(*c.c1, ind);
            return;
        }
        }
    }
};

} // namespace

std::string print_cmd(const Cmd& c) {
    Printer p;
    p.cmd(c, 0);
    return p.out.str();
}

std::string print_program(const Program& p) {
    std::ostringstream out;
    for (const auto& decl : p.invariants) {
        out << "invariant " << decl.name << " = " << decl.body->str() << ";\n";
    }
    if (!p.invariants.empty()) out << "\n";
    out << print_cmd(*p.main) << "\n";
    return out.str();
}

} // namespace gsv
