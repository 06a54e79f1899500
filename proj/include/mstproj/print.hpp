#pragma once

// Pretty-printers (inverse of the parser) and alpha-normalisation.
// Singleton choices print without braces:  p->q:m. G   /   q!m. L

#include <map>
#include <string>

#include "syntax.hpp"

namespace mstproj {

inline std::string pretty(const GlobalPtr& g) {
    if (std::holds_alternative<GEnd>(g->node)) return "end";
    if (const auto* v = std::get_if<GVar>(&g->node)) return v->var;
    if (const auto* r = std::get_if<GRec>(&g->node))
        return "mu " + r->var + ". " + pretty(r->body);
    const auto& c = std::get<GChoice>(g->node);
    auto branch = [&](const GBranch& b) {
        return c.sender.name + "->" + b.receiver.name + ":" + b.message.label + ". " +
               pretty(b.continuation);
    };
    if (c.branches.size() == 1) return branch(c.branches[0]);
    std::string out = "+ { ";
    for (size_t i = 0; i < c.branches.size(); ++i) {
        if (i) out += ", ";
        out += branch(c.branches[i]);
    }
    return out + " }";
}

inline std::string pretty(const LocalPtr& l) {
    if (std::holds_alternative<LEnd>(l->node)) return "end";
    if (const auto* v = std::get_if<LVar>(&l->node)) return v->var;
    if (const auto* r = std::get_if<LRec>(&l->node))
        return "mu " + r->var + ". " + pretty(r->body);
    bool internal = std::holds_alternative<LInternal>(l->node);
    const auto& bs = internal ? std::get<LInternal>(l->node).branches
                              : std::get<LExternal>(l->node).branches;
    auto branch = [&](const LBranch& b) {
        return b.peer.name + (internal ? "!" : "?") + b.message.label + ". " +
               pretty(b.continuation);
    };
    if (bs.size() == 1) return branch(bs[0]);
    std::string out = internal ? "(+) { " : "& { ";
    for (size_t i = 0; i < bs.size(); ++i) {
        if (i) out += ", ";
        out += branch(bs[i]);
    }
    return out + " }";
}

// ---------------------------------------------------------------------------
// Alpha-normalisation: binders are renamed t, t1, t2, ... in pre-order so
// that alpha-equivalent types print identically.

namespace detail {

inline std::string fresh_var(int n) { return n == 0 ? "t" : "t" + std::to_string(n); }

inline GlobalPtr alpha_global(const GlobalPtr& g, std::map<std::string, std::string>& ren,
                              int& next) {
    if (std::holds_alternative<GEnd>(g->node)) return g;
    if (const auto* v = std::get_if<GVar>(&g->node)) {
        auto it = ren.find(v->var);
        return it == ren.end() ? g : g_var(it->second);
    }
    if (const auto* r = std::get_if<GRec>(&g->node)) {
        std::string name = fresh_var(next++);
        auto saved = ren;
        ren[r->var] = name;
        GlobalPtr body = alpha_global(r->body, ren, next);
        ren = saved;
        return g_rec(name, body);
    }
    const auto& c = std::get<GChoice>(g->node);
    std::vector<GBranch> bs;
    for (const auto& b : c.branches)
        bs.push_back({b.receiver, b.message, alpha_global(b.continuation, ren, next)});
    return g_choice(c.sender, std::move(bs));
}

inline LocalPtr alpha_local(const LocalPtr& l, std::map<std::string, std::string>& ren,
                            int& next) {
    if (std::holds_alternative<LEnd>(l->node)) return l;
    if (const auto* v = std::get_if<LVar>(&l->node)) {
        auto it = ren.find(v->var);
        return it == ren.end() ? l : l_var(it->second);
    }
    if (const auto* r = std::get_if<LRec>(&l->node)) {
        std::string name = fresh_var(next++);
        auto saved = ren;
        ren[r->var] = name;
        LocalPtr body = alpha_local(r->body, ren, next);
        ren = saved;
        return l_rec(name, body);
    }
    bool internal = std::holds_alternative<LInternal>(l->node);
    const auto& src = internal ? std::get<LInternal>(l->node).branches
                               : std::get<LExternal>(l->node).branches;
    std::vector<LBranch> bs;
    for (const auto& b : src)
        bs.push_back({b.peer, b.message, alpha_local(b.continuation, ren, next)});
    return internal ? l_internal(std::move(bs)) : l_external(std::move(bs));
}

} // namespace detail

inline GlobalPtr alpha_normalise(const GlobalPtr& g) {
    std::map<std::string, std::string> ren;
    int next = 0;
    return detail::alpha_global(g, ren, next);
}

inline LocalPtr alpha_normalise(const LocalPtr& l) {
    std::map<std::string, std::string> ren;
    int next = 0;
    return detail::alpha_local(l, ren, next);
}

} // namespace mstproj
