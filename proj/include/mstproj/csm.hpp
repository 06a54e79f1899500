#pragma once

// A system of communicating state machines: one local automaton per role
// plus one FIFO channel per ordered role pair.  Bounded exploration checks
// deadlock freedom and protocol fidelity against the global automaton.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "automata.hpp"
#include "syntax.hpp"

namespace mstproj {

struct Csm {
    std::vector<Role> roles; // sorted
    std::map<Role, StateMachine> machines; // epsilon-free

    size_t role_index(const Role& r) const {
        auto it = std::lower_bound(roles.begin(), roles.end(), r);
        if (it == roles.end() || *it != r)
            throw std::runtime_error("unknown role " + r.name);
        return static_cast<size_t>(it - roles.begin());
    }
};

struct MixedChoiceError : std::runtime_error {
    explicit MixedChoiceError(const std::string& what) : std::runtime_error(what) {}
};

// Builds a system from local types.  Machines are epsilon-eliminated so a
// configuration is just one control state per role; mixed-choice states
// (both a send and a receive enabled for the same role) are rejected.
inline Csm build_csm(const std::map<Role, LocalPtr>& locals) {
    Csm c;
    for (const auto& [role, type] : locals) c.roles.push_back(role);
    std::sort(c.roles.begin(), c.roles.end());
    for (const auto& [role, type] : locals) {
        StateMachine m = epsilon_eliminate(laut(type, role));
        for (int s : m.states) {
            bool sends = false, receives = false;
            for (const auto* t : m.out(s)) {
                if (t->label->is_send) sends = true;
                else receives = true;
            }
            if (sends && receives)
                throw MixedChoiceError("role " + role.name + " mixes send and receive in one state");
        }
        c.machines.emplace(role, std::move(m));
    }
    return c;
}

struct Configuration {
    std::vector<int> states; // indexed like Csm::roles
    std::map<std::pair<Role, Role>, std::deque<Message>> channels;

    auto operator<=>(const Configuration&) const = default;

    bool channels_empty() const {
        for (const auto& [k, q] : channels)
            if (!q.empty()) return false;
        return true;
    }
};

inline Configuration initial_configuration(const Csm& c) {
    Configuration conf;
    for (const Role& r : c.roles) conf.states.push_back(c.machines.at(r).initial);
    return conf;
}

inline bool is_final(const Csm& c, const Configuration& conf) {
    for (size_t i = 0; i < c.roles.size(); ++i)
        if (!c.machines.at(c.roles[i]).finals.count(conf.states[i])) return false;
    return conf.channels_empty();
}

// Events enabled in `conf`; sends are included regardless of channel bound
// (the bound is exploration policy, not semantics).
inline std::vector<std::pair<Event, int>> enabled(const Csm& c, const Configuration& conf) {
    std::vector<std::pair<Event, int>> out;
    for (size_t i = 0; i < c.roles.size(); ++i) {
        const StateMachine& m = c.machines.at(c.roles[i]);
        for (const auto* t : m.out(conf.states[i])) {
            const Event& e = *t->label;
            if (!e.is_send) {
                auto it = conf.channels.find({e.sender, e.receiver});
                if (it == conf.channels.end() || it->second.empty() ||
                    it->second.front() != e.message)
                    continue;
            }
            out.push_back({e, t->to});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Configuration step(const Csm& c, Configuration conf, const Event& e, int target_state) {
    size_t idx = c.role_index(active_role(e));
    conf.states[idx] = target_state;
    auto key = std::make_pair(e.sender, e.receiver);
    auto& chan = conf.channels[key];
    if (e.is_send) {
        chan.push_back(e.message);
    } else {
        chan.pop_front();
        if (chan.empty()) conf.channels.erase(key); // keep configurations canonical
    }
    return conf;
}

// Replays a word from the initial configuration; returns nullopt when some
// event is not enabled.
inline std::optional<Configuration> replay(const Csm& c, const Word& w) {
    Configuration conf = initial_configuration(c);
    for (const Event& e : w) {
        bool moved = false;
        for (const auto& [ev, target] : enabled(c, conf)) {
            if (ev == e) {
                conf = step(c, conf, e, target);
                moved = true;
                break;
            }
        }
        if (!moved) return std::nullopt;
    }
    return conf;
}

// ---------------------------------------------------------------------------
// Bounded exploration

struct ExplorationResult {
    std::vector<std::pair<Word, Configuration>> deadlocks;
    std::vector<Word> maximal_traces;      // reach a final configuration
    std::vector<Word> boundary_prefixes;   // stopped by depth or channel bound
    size_t configurations_visited = 0;
    bool truncated = false;                // some send was pruned by the channel bound
};

inline ExplorationResult explore(const Csm& c, size_t depth, size_t channel_bound,
                                 size_t cap = state_cap()) {
    ExplorationResult res;
    // Deduplicate on (configuration, best remaining depth): a configuration
    // is re-expanded only when reached with more room than before.
    std::map<Configuration, size_t> best_remaining;

    struct Item {
        Configuration conf;
        Word trace;
    };
    std::vector<Item> stack;
    stack.push_back({initial_configuration(c), {}});

    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        size_t remaining = depth - it.trace.size();
        auto seen = best_remaining.find(it.conf);
        if (seen != best_remaining.end() && seen->second >= remaining) continue;
        best_remaining[it.conf] = remaining;
        if (++res.configurations_visited > cap)
            throw ExplosionGuard("explore exceeded cap of " + std::to_string(cap));

        auto moves = enabled(c, it.conf);
        if (moves.empty()) {
            if (is_final(c, it.conf)) res.maximal_traces.push_back(it.trace);
            else res.deadlocks.push_back({it.trace, it.conf});
            continue;
        }
        if (is_final(c, it.conf)) res.maximal_traces.push_back(it.trace);
        if (remaining == 0) {
            res.boundary_prefixes.push_back(it.trace);
            continue;
        }
        bool expanded = false;
        for (const auto& [e, target] : moves) {
            if (e.is_send) {
                const auto chan = it.conf.channels.find({e.sender, e.receiver});
                if (chan != it.conf.channels.end() && chan->second.size() >= channel_bound) {
                    res.truncated = true;
                    continue;
                }
            }
            Word trace = it.trace;
            trace.push_back(e);
            stack.push_back({step(c, it.conf, e, target), std::move(trace)});
            expanded = true;
        }
        if (!expanded) res.boundary_prefixes.push_back(it.trace);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Channel compliance and trace equivalence

inline bool channel_compliant(const Word& w) {
    std::map<std::pair<Role, Role>, std::vector<Message>> sends;
    std::map<std::pair<Role, Role>, size_t> recvd;
    for (const Event& e : w) {
        auto key = std::make_pair(e.sender, e.receiver);
        if (e.is_send) {
            sends[key].push_back(e.message);
        } else {
            size_t i = recvd[key]++;
            const auto& ss = sends[key];
            if (i >= ss.size() || ss[i] != e.message) return false;
        }
    }
    return true;
}

// Two channel-compliant words are equivalent modulo the swap relation iff
// they agree on every role's subsequence of events.
inline bool equivalent_mod_swaps(const Word& a, const Word& b) {
    if (!channel_compliant(a) || !channel_compliant(b)) return false;
    std::set<Role> roles;
    for (const Event& e : a) roles.insert(active_role(e));
    for (const Event& e : b) roles.insert(active_role(e));
    for (const Role& r : roles)
        if (project_word(a, r) != project_word(b, r)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Fidelity: the system's traces and the global automaton's traces agree up
// to reordering of independent events, within the explored bound.

struct FidelityReport {
    bool superset_ok = true; // every bounded global trace replays in the system
    bool subset_ok = true;   // every system trace is justified by a global run
    std::vector<Word> superset_counterexamples;
    std::vector<Word> subset_counterexamples;
    bool truncated = false;

    bool ok() const { return superset_ok && subset_ok; }
};

namespace detail {

// Searches for a run of `g` whose trace projects, per role, onto the given
// sequences.  With `exact`, the run must consume everything and end final;
// otherwise each role's sequence only has to be a prefix of the run's
// projection (letters for already-satisfied roles are free).
inline bool find_matching_run(const StateMachine& g, const std::map<Role, Word>& per_role,
                              bool exact, size_t cap) {
    std::vector<Role> roles;
    std::vector<const Word*> seqs;
    for (const auto& [r, w] : per_role) {
        roles.push_back(r);
        seqs.push_back(&w);
    }
    using Key = std::pair<int, std::vector<size_t>>;
    std::set<Key> visited;
    std::vector<Key> stack;
    std::vector<size_t> zero(roles.size(), 0);
    for (int s : g.eps_closure({g.initial})) stack.push_back({s, zero});

    auto done = [&](const std::vector<size_t>& idx) {
        for (size_t i = 0; i < idx.size(); ++i)
            if (idx[i] != seqs[i]->size()) return false;
        return true;
    };

    while (!stack.empty()) {
        Key k = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(k).second) continue;
        if (visited.size() > cap)
            throw ExplosionGuard("fidelity run search exceeded cap of " + std::to_string(cap));
        const auto& [state, idx] = k;
        if (done(idx)) {
            if (!exact) return true;
            if (g.finals.count(state)) return true;
        }
        for (const auto* t : g.out(state)) {
            if (!t->label) {
                stack.push_back({t->to, idx});
                continue;
            }
            const Role& owner = active_role(*t->label);
            auto rit = std::lower_bound(roles.begin(), roles.end(), owner);
            if (rit == roles.end() || *rit != owner) {
                // A role with no observed events: any of its letters would
                // break an exact match but is free slack for prefix matching.
                if (!exact) stack.push_back({t->to, idx});
                continue;
            }
            size_t ri = static_cast<size_t>(rit - roles.begin());
            if (idx[ri] < seqs[ri]->size()) {
                if ((*seqs[ri])[idx[ri]] == *t->label) {
                    auto idx2 = idx;
                    ++idx2[ri];
                    stack.push_back({t->to, idx2});
                }
            } else if (!exact) {
                stack.push_back({t->to, idx});
            }
        }
    }
    return false;
}

inline std::map<Role, Word> per_role_projections(const Word& w, const std::vector<Role>& roles) {
    std::map<Role, Word> out;
    for (const Role& r : roles) out[r] = project_word(w, r);
    return out;
}

} // namespace detail

inline FidelityReport fidelity_check(const GlobalPtr& g, const Csm& c, size_t depth,
                                     size_t channel_bound, size_t cap = state_cap()) {
    FidelityReport rep;
    StateMachine ga = gaut(g);

    // Direction 1: every maximal bounded global trace replays in the system.
    for (const BoundedWord& bw : bounded_words(ga, depth, cap)) {
        if (!bw.maximal) continue;
        std::optional<Configuration> end = replay(c, bw.word);
        if (!end || !is_final(c, *end)) {
            rep.superset_ok = false;
            rep.superset_counterexamples.push_back(bw.word);
        }
    }

    // Direction 2: system traces are justified by global runs.
    ExplorationResult ex = explore(c, depth, channel_bound, cap);
    rep.truncated = ex.truncated;
    std::set<Word> checked;
    for (const Word& w : ex.maximal_traces) {
        if (!checked.insert(w).second) continue;
        if (!detail::find_matching_run(ga, detail::per_role_projections(w, c.roles), true, cap)) {
            rep.subset_ok = false;
            rep.subset_counterexamples.push_back(w);
        }
    }
    for (const Word& w : ex.boundary_prefixes) {
        if (!checked.insert(w).second) continue;
        if (!detail::find_matching_run(ga, detail::per_role_projections(w, c.roles), false, cap)) {
            rep.subset_ok = false;
            rep.subset_counterexamples.push_back(w);
        }
    }
    return rep;
}

} // namespace mstproj
