#pragma once

// Abstract syntax for global and local session types, plus structural
// well-formedness checks (binding, guardedness, branch distinctness).

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mstproj {

struct Role {
    std::string name;
    auto operator<=>(const Role&) const = default;
};

struct Message {
    std::string label;
    auto operator<=>(const Message&) const = default;
};

// ---------------------------------------------------------------------------
// Global types:  end | sum of p->q_i:m_i.G_i | mu t.G | t

struct GlobalType;
using GlobalPtr = std::shared_ptr<const GlobalType>;

struct GBranch {
    Role receiver;
    Message message;
    GlobalPtr continuation;
};

struct GEnd {};
struct GChoice {
    Role sender;
    std::vector<GBranch> branches;
};
struct GRec {
    std::string var;
    GlobalPtr body;
};
struct GVar {
    std::string var;
};

struct GlobalType {
    std::variant<GEnd, GChoice, GRec, GVar> node;
};

inline GlobalPtr g_end() { return std::make_shared<GlobalType>(GlobalType{GEnd{}}); }
inline GlobalPtr g_choice(Role sender, std::vector<GBranch> branches) {
    return std::make_shared<GlobalType>(GlobalType{GChoice{std::move(sender), std::move(branches)}});
}
inline GlobalPtr g_exchange(Role sender, Role receiver, Message m, GlobalPtr cont) {
    return g_choice(std::move(sender), {GBranch{std::move(receiver), std::move(m), std::move(cont)}});
}
inline GlobalPtr g_rec(std::string var, GlobalPtr body) {
    return std::make_shared<GlobalType>(GlobalType{GRec{std::move(var), std::move(body)}});
}
inline GlobalPtr g_var(std::string var) {
    return std::make_shared<GlobalType>(GlobalType{GVar{std::move(var)}});
}

inline bool equal(const GlobalPtr& a, const GlobalPtr& b) {
    if (a == b) return true;
    if (a->node.index() != b->node.index()) return false;
    if (std::holds_alternative<GEnd>(a->node)) return true;
    if (const auto* v = std::get_if<GVar>(&a->node))
        return v->var == std::get<GVar>(b->node).var;
    if (const auto* r = std::get_if<GRec>(&a->node)) {
        const auto& rb = std::get<GRec>(b->node);
        return r->var == rb.var && equal(r->body, rb.body);
    }
    const auto& ca = std::get<GChoice>(a->node);
    const auto& cb = std::get<GChoice>(b->node);
    if (ca.sender != cb.sender || ca.branches.size() != cb.branches.size()) return false;
    for (size_t i = 0; i < ca.branches.size(); ++i) {
        if (ca.branches[i].receiver != cb.branches[i].receiver) return false;
        if (ca.branches[i].message != cb.branches[i].message) return false;
        if (!equal(ca.branches[i].continuation, cb.branches[i].continuation)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Local types:  end | internal choice q_i!m_i.L_i | external choice q_i?m_i.L_i
//             | mu t.L | t

struct LocalType;
using LocalPtr = std::shared_ptr<const LocalType>;

struct LBranch {
    Role peer;
    Message message;
    LocalPtr continuation;
};

struct LEnd {};
struct LInternal {
    std::vector<LBranch> branches;
};
struct LExternal {
    std::vector<LBranch> branches;
};
struct LRec {
    std::string var;
    LocalPtr body;
};
struct LVar {
    std::string var;
};

struct LocalType {
    std::variant<LEnd, LInternal, LExternal, LRec, LVar> node;
};

inline LocalPtr l_end() { return std::make_shared<LocalType>(LocalType{LEnd{}}); }
inline LocalPtr l_internal(std::vector<LBranch> bs) {
    return std::make_shared<LocalType>(LocalType{LInternal{std::move(bs)}});
}
inline LocalPtr l_external(std::vector<LBranch> bs) {
    return std::make_shared<LocalType>(LocalType{LExternal{std::move(bs)}});
}
inline LocalPtr l_rec(std::string var, LocalPtr body) {
    return std::make_shared<LocalType>(LocalType{LRec{std::move(var), std::move(body)}});
}
inline LocalPtr l_var(std::string var) {
    return std::make_shared<LocalType>(LocalType{LVar{std::move(var)}});
}

inline bool equal(const LocalPtr& a, const LocalPtr& b) {
    if (a == b) return true;
    if (a->node.index() != b->node.index()) return false;
    if (std::holds_alternative<LEnd>(a->node)) return true;
    if (const auto* v = std::get_if<LVar>(&a->node))
        return v->var == std::get<LVar>(b->node).var;
    if (const auto* r = std::get_if<LRec>(&a->node)) {
        const auto& rb = std::get<LRec>(b->node);
        return r->var == rb.var && equal(r->body, rb.body);
    }
    const std::vector<LBranch>* ba = nullptr;
    const std::vector<LBranch>* bb = nullptr;
    if (const auto* c = std::get_if<LInternal>(&a->node)) {
        ba = &c->branches;
        bb = &std::get<LInternal>(b->node).branches;
    } else {
        ba = &std::get<LExternal>(a->node).branches;
        bb = &std::get<LExternal>(b->node).branches;
    }
    if (ba->size() != bb->size()) return false;
    for (size_t i = 0; i < ba->size(); ++i) {
        if ((*ba)[i].peer != (*bb)[i].peer) return false;
        if ((*ba)[i].message != (*bb)[i].message) return false;
        if (!equal((*ba)[i].continuation, (*bb)[i].continuation)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Well-formedness

struct ValidationIssue {
    enum class Kind {
        DuplicateRecVar,
        UnboundVar,
        Unguarded,
        BranchClash,
        SelfCommunication,
        EmptyChoice,
    };
    Kind kind;
    std::string detail;
};

inline const char* to_string(ValidationIssue::Kind k) {
    switch (k) {
        case ValidationIssue::Kind::DuplicateRecVar: return "DuplicateRecVar";
        case ValidationIssue::Kind::UnboundVar: return "UnboundVar";
        case ValidationIssue::Kind::Unguarded: return "Unguarded";
        case ValidationIssue::Kind::BranchClash: return "BranchClash";
        case ValidationIssue::Kind::SelfCommunication: return "SelfCommunication";
        case ValidationIssue::Kind::EmptyChoice: return "EmptyChoice";
    }
    return "?";
}

using ValidationReport = std::vector<ValidationIssue>;

namespace detail {

inline void validate_global(const GlobalPtr& g, std::set<std::string>& bound,
                            std::set<std::string>& seen_binders,
                            std::set<std::string> unguarded, ValidationReport& out) {
    if (std::holds_alternative<GEnd>(g->node)) return;
    if (const auto* v = std::get_if<GVar>(&g->node)) {
        if (!bound.count(v->var))
            out.push_back({ValidationIssue::Kind::UnboundVar, v->var});
        else if (unguarded.count(v->var))
            out.push_back({ValidationIssue::Kind::Unguarded, v->var});
        return;
    }
    if (const auto* r = std::get_if<GRec>(&g->node)) {
        if (seen_binders.count(r->var))
            out.push_back({ValidationIssue::Kind::DuplicateRecVar, r->var});
        seen_binders.insert(r->var);
        bound.insert(r->var);
        unguarded.insert(r->var);
        validate_global(r->body, bound, seen_binders, unguarded, out);
        bound.erase(r->var);
        return;
    }
    const auto& c = std::get<GChoice>(g->node);
    if (c.branches.empty())
        out.push_back({ValidationIssue::Kind::EmptyChoice, c.sender.name});
    std::set<std::pair<Role, Message>> keys;
    for (const auto& b : c.branches) {
        if (b.receiver == c.sender)
            out.push_back({ValidationIssue::Kind::SelfCommunication,
                           c.sender.name + "->" + b.receiver.name + ":" + b.message.label});
        if (!keys.insert({b.receiver, b.message}).second)
            out.push_back({ValidationIssue::Kind::BranchClash,
                           c.sender.name + "->" + b.receiver.name + ":" + b.message.label});
        // An exchange guards every recursion variable bound above it.
        validate_global(b.continuation, bound, seen_binders, {}, out);
    }
}

inline void validate_local(const LocalPtr& l, std::set<std::string>& bound,
                           std::set<std::string>& seen_binders,
                           std::set<std::string> unguarded, ValidationReport& out) {
    if (std::holds_alternative<LEnd>(l->node)) return;
    if (const auto* v = std::get_if<LVar>(&l->node)) {
        if (!bound.count(v->var))
            out.push_back({ValidationIssue::Kind::UnboundVar, v->var});
        else if (unguarded.count(v->var))
            out.push_back({ValidationIssue::Kind::Unguarded, v->var});
        return;
    }
    if (const auto* r = std::get_if<LRec>(&l->node)) {
        if (seen_binders.count(r->var))
            out.push_back({ValidationIssue::Kind::DuplicateRecVar, r->var});
        seen_binders.insert(r->var);
        bound.insert(r->var);
        unguarded.insert(r->var);
        validate_local(r->body, bound, seen_binders, unguarded, out);
        bound.erase(r->var);
        return;
    }
    const std::vector<LBranch>* bs = nullptr;
    if (const auto* c = std::get_if<LInternal>(&l->node)) bs = &c->branches;
    else bs = &std::get<LExternal>(l->node).branches;
    if (bs->empty()) out.push_back({ValidationIssue::Kind::EmptyChoice, ""});
    std::set<std::pair<Role, Message>> keys;
    for (const auto& b : *bs) {
        if (!keys.insert({b.peer, b.message}).second)
            out.push_back({ValidationIssue::Kind::BranchClash,
                           b.peer.name + ":" + b.message.label});
        validate_local(b.continuation, bound, seen_binders, {}, out);
    }
}

} // namespace detail

inline ValidationReport validate(const GlobalPtr& g) {
    ValidationReport out;
    std::set<std::string> bound, binders;
    detail::validate_global(g, bound, binders, {}, out);
    return out;
}

inline ValidationReport validate(const LocalPtr& l) {
    ValidationReport out;
    std::set<std::string> bound, binders;
    detail::validate_local(l, bound, binders, {}, out);
    return out;
}

// ---------------------------------------------------------------------------
// Recursion-binder map and role collection

using MuMap = std::map<std::string, GlobalPtr>;

inline void collect_mu(const GlobalPtr& g, MuMap& out) {
    if (const auto* r = std::get_if<GRec>(&g->node)) {
        out[r->var] = r->body;
        collect_mu(r->body, out);
    } else if (const auto* c = std::get_if<GChoice>(&g->node)) {
        for (const auto& b : c->branches) collect_mu(b.continuation, out);
    }
}

// Map from each recursion variable to the body of its binder.
inline MuMap get_mu(const GlobalPtr& g) {
    MuMap out;
    collect_mu(g, out);
    return out;
}

inline void collect_roles(const GlobalPtr& g, std::set<Role>& out) {
    if (const auto* c = std::get_if<GChoice>(&g->node)) {
        out.insert(c->sender);
        for (const auto& b : c->branches) {
            out.insert(b.receiver);
            collect_roles(b.continuation, out);
        }
    } else if (const auto* r = std::get_if<GRec>(&g->node)) {
        collect_roles(r->body, out);
    }
}

inline std::set<Role> roles_of(const GlobalPtr& g) {
    std::set<Role> out;
    collect_roles(g, out);
    return out;
}

// Node count: end and each variable occurrence count 1, a binder counts 1
// plus its body, a choice counts 1 per branch exchange plus continuations.
inline size_t ast_size(const GlobalPtr& g) {
    if (std::holds_alternative<GEnd>(g->node) || std::holds_alternative<GVar>(g->node)) return 1;
    if (const auto* r = std::get_if<GRec>(&g->node)) return 1 + ast_size(r->body);
    const auto& c = std::get<GChoice>(g->node);
    size_t n = 0;
    for (const auto& b : c.branches) n += 1 + ast_size(b.continuation);
    return n;
}

} // namespace mstproj
