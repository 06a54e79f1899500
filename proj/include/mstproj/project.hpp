#pragma once

// Projection of a global type onto one role, producing an annotated local
// type.  Every node carries the set of messages that can still arrive while
// the role is stuck there; the sets are computed lazily because they are
// only consulted when merging receptions from distinct senders.
//
// Merge cases, tried in order:
//   1. structurally equal (ignoring annotations)  -> keep, union annotations
//   2. two binders                                -> rename, merge bodies
//   3. internal choices with identical branch keys-> pointwise merge
//   4. external choices                           -> union of branch sets;
//      shared keys merge pointwise; a reception unique to one side must not
//      be an available message on the other side.
//
// Branches whose projection is just a recursion variable the role has not
// acted under since its binder ("empty paths") are dropped before merging.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "avail.hpp"
#include "syntax.hpp"

namespace mstproj {

// ---------------------------------------------------------------------------
// Annotated local types

struct Annotated;
using AnnPtr = std::shared_ptr<const Annotated>;

struct ABranch {
    Role peer;
    Message message;
    AnnPtr continuation;
};

struct AEnd {};
struct AInternal { std::vector<ABranch> branches; };
struct AExternal { std::vector<ABranch> branches; };
struct ARec { std::string var; AnnPtr body; };
struct AVar { std::string var; };

// A lazily evaluated, memoised message set.
class LazyMsgs {
public:
    LazyMsgs() : cell_(std::make_shared<Cell>()) { cell_->value.emplace(); }
    explicit LazyMsgs(std::function<std::set<MessageId>()> thunk)
        : cell_(std::make_shared<Cell>()) {
        cell_->thunk = std::move(thunk);
    }
    const std::set<MessageId>& force() const {
        if (!cell_->value) cell_->value = cell_->thunk();
        return *cell_->value;
    }
    static LazyMsgs unite(LazyMsgs a, LazyMsgs b) {
        return LazyMsgs([a, b]() {
            std::set<MessageId> out = a.force();
            const auto& rhs = b.force();
            out.insert(rhs.begin(), rhs.end());
            return out;
        });
    }

private:
    struct Cell {
        std::function<std::set<MessageId>()> thunk;
        mutable std::optional<std::set<MessageId>> value;
    };
    std::shared_ptr<Cell> cell_;
};

struct Annotated {
    std::variant<AEnd, AInternal, AExternal, ARec, AVar> node;
    LazyMsgs msgs;
};

inline AnnPtr ann(std::variant<AEnd, AInternal, AExternal, ARec, AVar> node, LazyMsgs msgs) {
    return std::make_shared<Annotated>(Annotated{std::move(node), std::move(msgs)});
}

inline LocalPtr erase(const AnnPtr& a) {
    if (std::holds_alternative<AEnd>(a->node)) return l_end();
    if (const auto* v = std::get_if<AVar>(&a->node)) return l_var(v->var);
    if (const auto* r = std::get_if<ARec>(&a->node)) return l_rec(r->var, erase(r->body));
    auto conv = [](const std::vector<ABranch>& bs) {
        std::vector<LBranch> out;
        for (const auto& b : bs) out.push_back({b.peer, b.message, erase(b.continuation)});
        return out;
    };
    if (const auto* c = std::get_if<AInternal>(&a->node)) return l_internal(conv(c->branches));
    return l_external(conv(std::get<AExternal>(a->node).branches));
}

// ---------------------------------------------------------------------------
// Failure reporting

struct ProjectionFailure {
    enum class Kind {
        MixedMerge,         // incompatible constructors (e.g. reception vs end)
        SendMergeMismatch,  // internal choices with different branch sets
        RecVarMismatch,     // binder merged against a non-binder / foreign var
        AvailabilityClash,  // a unique reception is available on the other side
        EmptyExternalChoice // every branch was dropped as an empty path
    };
    Kind kind;
    Role role;
    std::vector<int> path;  // branch indices from the root to the failing choice
    std::optional<MessageId> witness;
    std::string detail;
};

inline const char* to_string(ProjectionFailure::Kind k) {
    switch (k) {
        case ProjectionFailure::Kind::MixedMerge: return "MixedMerge";
        case ProjectionFailure::Kind::SendMergeMismatch: return "SendMergeMismatch";
        case ProjectionFailure::Kind::RecVarMismatch: return "RecVarMismatch";
        case ProjectionFailure::Kind::AvailabilityClash: return "AvailabilityClash";
        case ProjectionFailure::Kind::EmptyExternalChoice: return "EmptyExternalChoice";
    }
    return "?";
}

struct ProjectionResult {
    std::optional<AnnPtr> annotated;
    std::optional<ProjectionFailure> failure;
    bool gen_merge_used = false;  // merge joined receptions from distinct senders
    size_t avail_evaluations = 0; // number of availability sets actually computed

    bool ok() const { return annotated.has_value(); }
    LocalPtr local() const { return erase(*annotated); }
};

// ---------------------------------------------------------------------------

namespace detail {

struct ProjError {
    ProjectionFailure failure;
};

// Shared by every annotation thunk a projection creates; keeps the binder
// map alive for as long as any annotated type referencing it.
struct ProjCtx {
    MuMap mu;
    Role target;
    size_t avail_evaluations = 0;
    bool gen_merge_used = false;
};

inline AnnPtr substitute_var(const AnnPtr& a, const std::string& from, const std::string& to) {
    if (std::holds_alternative<AEnd>(a->node)) return a;
    if (const auto* v = std::get_if<AVar>(&a->node))
        return v->var == from ? ann(AVar{to}, a->msgs) : a;
    if (const auto* r = std::get_if<ARec>(&a->node)) {
        if (r->var == from) return a; // shadowed
        return ann(ARec{r->var, substitute_var(r->body, from, to)}, a->msgs);
    }
    auto conv = [&](const std::vector<ABranch>& bs) {
        std::vector<ABranch> out;
        for (const auto& b : bs)
            out.push_back({b.peer, b.message, substitute_var(b.continuation, from, to)});
        return out;
    };
    if (const auto* c = std::get_if<AInternal>(&a->node))
        return ann(AInternal{conv(c->branches)}, a->msgs);
    return ann(AExternal{conv(std::get<AExternal>(a->node).branches)}, a->msgs);
}

class Projector {
public:
    Projector(GlobalPtr root, Role target)
        : ctx_(std::make_shared<ProjCtx>()) {
        ctx_->mu = get_mu(root);
        ctx_->target = std::move(target);
        root_ = std::move(root);
    }

    ProjectionResult run() {
        ProjectionResult res;
        try {
            std::vector<int> path;
            res.annotated = project(root_, {}, path);
        } catch (ProjError& e) {
            e.failure.role = ctx_->target;
            res.failure = std::move(e.failure);
        }
        res.gen_merge_used = ctx_->gen_merge_used;
        res.avail_evaluations = ctx_->avail_evaluations;
        return res;
    }

private:
    GlobalPtr root_;
    std::shared_ptr<ProjCtx> ctx_;

    LazyMsgs lazy_avail(std::set<Role> blocked, std::set<std::string> visited, GlobalPtr g) {
        auto ctx = ctx_;
        return LazyMsgs([ctx, blocked = std::move(blocked), visited = std::move(visited),
                         g = std::move(g)]() {
            return avail(blocked, visited, g, ctx->mu, &ctx->avail_evaluations);
        });
    }

    AnnPtr project(const GlobalPtr& g, const std::set<std::string>& idle_since,
                   std::vector<int>& path) {
        const Role& r = ctx_->target;
        if (std::holds_alternative<GEnd>(g->node)) return ann(AEnd{}, LazyMsgs());
        if (const auto* v = std::get_if<GVar>(&g->node))
            return ann(AVar{v->var}, lazy_avail({r}, {v->var}, ctx_->mu.at(v->var)));
        if (const auto* rec = std::get_if<GRec>(&g->node)) {
            std::set<std::string> idle2 = idle_since;
            idle2.insert(rec->var);
            AnnPtr body = project(rec->body, idle2, path);
            if (const auto* bv = std::get_if<AVar>(&body->node); bv && bv->var == rec->var)
                return ann(AEnd{}, LazyMsgs()); // the role never acts in the loop
            return ann(ARec{rec->var, body}, lazy_avail({r}, {rec->var}, rec->body));
        }

        const auto& c = std::get<GChoice>(g->node);
        if (c.sender == r) {
            std::vector<ABranch> bs;
            LazyMsgs msgs;
            bool first = true;
            for (size_t i = 0; i < c.branches.size(); ++i) {
                const auto& b = c.branches[i];
                path.push_back(static_cast<int>(i));
                bs.push_back({b.receiver, b.message, project(b.continuation, {}, path)});
                path.pop_back();
                LazyMsgs m = lazy_avail({b.receiver, r}, {}, b.continuation);
                msgs = first ? m : LazyMsgs::unite(msgs, m);
                first = false;
            }
            return ann(AInternal{std::move(bs)}, std::move(msgs));
        }

        // The role is not the sender: receptions targeted at it form an
        // external choice; other branches project independently, empty
        // paths are dropped, and everything left merges into one type.
        std::vector<AnnPtr> items;
        std::vector<ABranch> recvs;
        LazyMsgs recv_msgs;
        bool first_recv = true;
        std::vector<AnnPtr> dropped;
        for (size_t i = 0; i < c.branches.size(); ++i) {
            const auto& b = c.branches[i];
            if (b.receiver == r) {
                path.push_back(static_cast<int>(i));
                recvs.push_back({c.sender, b.message, project(b.continuation, {}, path)});
                path.pop_back();
                LazyMsgs m = lazy_avail({r}, {}, b.continuation);
                recv_msgs = first_recv ? m : LazyMsgs::unite(recv_msgs, m);
                first_recv = false;
            }
        }
        if (!recvs.empty()) items.push_back(ann(AExternal{std::move(recvs)}, recv_msgs));
        for (size_t i = 0; i < c.branches.size(); ++i) {
            const auto& b = c.branches[i];
            if (b.receiver == r) continue;
            path.push_back(static_cast<int>(i));
            AnnPtr p = project(b.continuation, idle_since, path);
            path.pop_back();
            if (const auto* pv = std::get_if<AVar>(&p->node); pv && idle_since.count(pv->var)) {
                dropped.push_back(p); // empty path: the role never moved in this loop
                continue;
            }
            items.push_back(p);
        }
        if (items.empty()) {
            // Every branch is an empty path.  If they all wind back to the
            // same binder the whole choice is itself an empty path.
            const auto* v0 = std::get_if<AVar>(&dropped.front()->node);
            bool same = true;
            LazyMsgs msgs = dropped.front()->msgs;
            for (size_t i = 1; i < dropped.size(); ++i) {
                const auto* vi = std::get_if<AVar>(&dropped[i]->node);
                if (!vi || vi->var != v0->var) { same = false; break; }
                msgs = LazyMsgs::unite(msgs, dropped[i]->msgs);
            }
            if (same) return ann(AVar{v0->var}, msgs);
            throw ProjError{{ProjectionFailure::Kind::EmptyExternalChoice, {}, path, {},
                             "all branches dropped as empty paths over distinct binders"}};
        }
        AnnPtr acc = items[0];
        for (size_t i = 1; i < items.size(); ++i) {
            try {
                acc = merge(acc, items[i]);
            } catch (ProjError& e) {
                if (e.failure.path.empty()) e.failure.path = path;
                throw;
            }
        }
        return acc;
    }

    AnnPtr merge(const AnnPtr& a, const AnnPtr& b) {
        // Case 1: identical up to annotations.
        if (equal(erase(a), erase(b)))
            return ann(a->node, LazyMsgs::unite(a->msgs, b->msgs));

        const auto* ra = std::get_if<ARec>(&a->node);
        const auto* rb = std::get_if<ARec>(&b->node);
        if (ra && rb) {
            AnnPtr body_b = substitute_var(rb->body, rb->var, ra->var);
            return ann(ARec{ra->var, merge(ra->body, body_b)},
                       LazyMsgs::unite(a->msgs, b->msgs));
        }
        if (ra || rb)
            throw ProjError{{ProjectionFailure::Kind::RecVarMismatch, {}, {}, {},
                             "binder merged against a non-binder"}};
        if (std::holds_alternative<AVar>(a->node) || std::holds_alternative<AVar>(b->node))
            throw ProjError{{ProjectionFailure::Kind::RecVarMismatch, {}, {}, {},
                             "distinct recursion variables"}};

        const auto* ia = std::get_if<AInternal>(&a->node);
        const auto* ib = std::get_if<AInternal>(&b->node);
        if (ia && ib) return merge_internal(*ia, *ib, a->msgs, b->msgs);
        const auto* ea = std::get_if<AExternal>(&a->node);
        const auto* eb = std::get_if<AExternal>(&b->node);
        if (ea && eb) return merge_external(*ea, *eb, a->msgs, b->msgs);
        throw ProjError{{ProjectionFailure::Kind::MixedMerge, {}, {}, {},
                         "incompatible local type constructors"}};
    }

    AnnPtr merge_internal(const AInternal& a, const AInternal& b, const LazyMsgs& ma,
                          const LazyMsgs& mb) {
        auto keys = [](const AInternal& c) {
            std::set<std::pair<Role, Message>> out;
            for (const auto& br : c.branches) out.insert({br.peer, br.message});
            return out;
        };
        if (keys(a) != keys(b))
            throw ProjError{{ProjectionFailure::Kind::SendMergeMismatch, {}, {}, {},
                             "internal choices offer different branches"}};
        std::vector<ABranch> out;
        for (const auto& ba : a.branches) {
            const ABranch* match = nullptr;
            for (const auto& bb : b.branches)
                if (bb.peer == ba.peer && bb.message == ba.message) { match = &bb; break; }
            out.push_back({ba.peer, ba.message, merge(ba.continuation, match->continuation)});
        }
        return ann(AInternal{std::move(out)}, LazyMsgs::unite(ma, mb));
    }

    AnnPtr merge_external(const AExternal& a, const AExternal& b, const LazyMsgs& ma,
                          const LazyMsgs& mb) {
        const Role& r = ctx_->target;
        std::set<std::pair<Role, Message>> ka, kb;
        std::set<Role> peers;
        for (const auto& br : a.branches) { ka.insert({br.peer, br.message}); peers.insert(br.peer); }
        for (const auto& br : b.branches) { kb.insert({br.peer, br.message}); peers.insert(br.peer); }

        bool a_unique = false, b_unique = false;
        for (const auto& k : ka) if (!kb.count(k)) a_unique = true;
        for (const auto& k : kb) if (!ka.count(k)) b_unique = true;

        // Receptions from a single sender are ordered by the channel itself;
        // only cross-sender unions need the availability guard.
        if (peers.size() > 1 && (a_unique || b_unique)) {
            if (a_unique && b_unique) ctx_->gen_merge_used = true;
            for (const auto& br : a.branches) {
                if (kb.count({br.peer, br.message})) continue;
                MessageId id{br.peer, r, br.message};
                if (mb.force().count(id))
                    throw ProjError{{ProjectionFailure::Kind::AvailabilityClash, {}, {}, id,
                                     "reception unique to one side is available on the other"}};
            }
            for (const auto& br : b.branches) {
                if (ka.count({br.peer, br.message})) continue;
                MessageId id{br.peer, r, br.message};
                if (ma.force().count(id))
                    throw ProjError{{ProjectionFailure::Kind::AvailabilityClash, {}, {}, id,
                                     "reception unique to one side is available on the other"}};
            }
        }

        std::vector<ABranch> out;
        for (const auto& br : a.branches) {
            if (!kb.count({br.peer, br.message})) { out.push_back(br); continue; }
            const ABranch* match = nullptr;
            for (const auto& bb : b.branches)
                if (bb.peer == br.peer && bb.message == br.message) { match = &bb; break; }
            out.push_back({br.peer, br.message, merge(br.continuation, match->continuation)});
        }
        for (const auto& br : b.branches)
            if (!ka.count({br.peer, br.message})) out.push_back(br);
        std::sort(out.begin(), out.end(), [](const ABranch& x, const ABranch& y) {
            return std::tie(x.peer, x.message) < std::tie(y.peer, y.message);
        });
        return ann(AExternal{std::move(out)}, LazyMsgs::unite(ma, mb));
    }
};

} // namespace detail

inline ProjectionResult project(const GlobalPtr& g, const Role& role) {
    return detail::Projector(g, role).run();
}

struct ProjectAllResult {
    std::map<Role, ProjectionResult> per_role;
    bool ok = true;
    bool gen_merge_used = false;
    size_t avail_evaluations = 0;
};

inline ProjectAllResult project_all(const GlobalPtr& g) {
    ProjectAllResult out;
    for (const Role& r : roles_of(g)) {
        ProjectionResult res = project(g, r);
        out.ok = out.ok && res.ok();
        out.gen_merge_used = out.gen_merge_used || res.gen_merge_used;
        out.avail_evaluations += res.avail_evaluations;
        out.per_role.emplace(r, std::move(res));
    }
    return out;
}

} // namespace mstproj
