#pragma once

// Finite-state views of types.  The global automaton has one state per
// syntactic subterm (all `end`s collapse into one sink); every exchange is
// split into a send letter followed by a receive letter through a fresh
// intermediate state.  Local automata use send/receive letters directly.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "syntax.hpp"

namespace mstproj {

struct Event {
    bool is_send;
    Role sender;
    Role receiver;
    Message message;
    auto operator<=>(const Event&) const = default;
};

inline Event send_event(Role s, Role r, Message m) {
    return {true, std::move(s), std::move(r), std::move(m)};
}
inline Event receive_event(Role s, Role r, Message m) {
    return {false, std::move(s), std::move(r), std::move(m)};
}

inline std::string to_string(const Event& e) {
    return e.sender.name + ">" + e.receiver.name + (e.is_send ? "!" : "?") + e.message.label;
}

// The role that performs the event.
inline const Role& active_role(const Event& e) { return e.is_send ? e.sender : e.receiver; }

using Word = std::vector<Event>;

inline std::string to_string(const Word& w) {
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += "·";
        out += to_string(w[i]);
    }
    return out;
}

struct ExplosionGuard : std::runtime_error {
    explicit ExplosionGuard(const std::string& what) : std::runtime_error(what) {}
};

inline size_t state_cap() {
    if (const char* env = std::getenv("MSTPROJ_STATE_CAP")) {
        size_t v = std::strtoull(env, nullptr, 10);
        if (v > 0) return v;
    }
    return 200000;
}

// ---------------------------------------------------------------------------

struct StateMachine {
    struct Transition {
        int from;
        std::optional<Event> label; // nullopt = epsilon
        int to;
    };

    int initial = 0;
    std::set<int> states;
    std::set<int> finals;
    std::vector<Transition> transitions;
    std::map<int, std::string> names;

    std::vector<const Transition*> out(int s) const {
        std::vector<const Transition*> r;
        for (const auto& t : transitions)
            if (t.from == s) r.push_back(&t);
        return r;
    }

    std::set<Event> alphabet() const {
        std::set<Event> out;
        for (const auto& t : transitions)
            if (t.label) out.insert(*t.label);
        return out;
    }

    std::set<int> eps_closure(std::set<int> s) const {
        std::vector<int> stack(s.begin(), s.end());
        while (!stack.empty()) {
            int q = stack.back();
            stack.pop_back();
            for (const auto& t : transitions)
                if (t.from == q && !t.label && s.insert(t.to).second) stack.push_back(t.to);
        }
        return s;
    }

    std::set<int> step_letter(const std::set<int>& s, const Event& e) const {
        std::set<int> out;
        for (const auto& t : transitions)
            if (t.label && *t.label == e && s.count(t.from)) out.insert(t.to);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Construction from types

namespace detail {

struct GAutBuilder {
    StateMachine m;
    int next = 0;
    int end_state = -1;
    std::map<std::string, int> binder_state;
    std::vector<std::pair<int, std::string>> pending_vars;

    int fresh(const std::string& name) {
        int id = next++;
        m.states.insert(id);
        m.names[id] = name;
        return id;
    }

    int walk(const GlobalPtr& g) {
        if (std::holds_alternative<GEnd>(g->node)) {
            if (end_state < 0) {
                end_state = fresh("end");
                m.finals.insert(end_state);
            }
            return end_state;
        }
        if (const auto* v = std::get_if<GVar>(&g->node)) {
            int id = fresh(v->var);
            pending_vars.push_back({id, v->var});
            return id;
        }
        if (const auto* r = std::get_if<GRec>(&g->node)) {
            int id = fresh("mu " + r->var);
            binder_state[r->var] = id;
            int body = walk(r->body);
            m.transitions.push_back({id, std::nullopt, body});
            return id;
        }
        const auto& c = std::get<GChoice>(g->node);
        int id = fresh("choice " + c.sender.name);
        for (const auto& b : c.branches) {
            int cont = walk(b.continuation);
            int mid = fresh(c.sender.name + ">" + b.receiver.name + ":" + b.message.label);
            m.transitions.push_back({id, send_event(c.sender, b.receiver, b.message), mid});
            m.transitions.push_back({mid, receive_event(c.sender, b.receiver, b.message), cont});
        }
        return id;
    }
};

struct LAutBuilder {
    StateMachine m;
    Role owner;
    int next = 0;
    int end_state = -1;
    std::map<std::string, int> binder_state;
    std::vector<std::pair<int, std::string>> pending_vars;

    int fresh(const std::string& name) {
        int id = next++;
        m.states.insert(id);
        m.names[id] = name;
        return id;
    }

    int walk(const LocalPtr& l) {
        if (std::holds_alternative<LEnd>(l->node)) {
            if (end_state < 0) {
                end_state = fresh("end");
                m.finals.insert(end_state);
            }
            return end_state;
        }
        if (const auto* v = std::get_if<LVar>(&l->node)) {
            int id = fresh(v->var);
            pending_vars.push_back({id, v->var});
            return id;
        }
        if (const auto* r = std::get_if<LRec>(&l->node)) {
            int id = fresh("mu " + r->var);
            binder_state[r->var] = id;
            int body = walk(r->body);
            m.transitions.push_back({id, std::nullopt, body});
            return id;
        }
        bool internal = std::holds_alternative<LInternal>(l->node);
        const auto& bs = internal ? std::get<LInternal>(l->node).branches
                                  : std::get<LExternal>(l->node).branches;
        int id = fresh(internal ? "select" : "branch");
        for (const auto& b : bs) {
            int cont = walk(b.continuation);
            Event e = internal ? send_event(owner, b.peer, b.message)
                               : receive_event(b.peer, owner, b.message);
            m.transitions.push_back({id, e, cont});
        }
        return id;
    }
};

} // namespace detail

inline StateMachine gaut(const GlobalPtr& g) {
    detail::GAutBuilder b;
    b.m.initial = b.walk(g);
    for (const auto& [state, var] : b.pending_vars)
        b.m.transitions.push_back({state, std::nullopt, b.binder_state.at(var)});
    return std::move(b.m);
}

inline StateMachine laut(const LocalPtr& l, const Role& owner) {
    detail::LAutBuilder b;
    b.owner = owner;
    b.m.initial = b.walk(l);
    for (const auto& [state, var] : b.pending_vars)
        b.m.transitions.push_back({state, std::nullopt, b.binder_state.at(var)});
    return std::move(b.m);
}

// ---------------------------------------------------------------------------
// Word enumeration and alphabet operations

struct BoundedWord {
    Word word;
    bool maximal = false;    // some run ends in a final sink
    bool extendable = false; // some run can take another letter
};

inline std::vector<BoundedWord> bounded_words(const StateMachine& m, size_t max_len,
                                              size_t cap = state_cap()) {
    std::vector<BoundedWord> out;
    std::set<Event> alpha = m.alphabet();

    auto letter_moves = [&](const std::set<int>& s) {
        std::vector<Event> moves;
        for (const Event& e : alpha)
            if (!m.step_letter(s, e).empty()) moves.push_back(e);
        return moves;
    };
    auto has_final_sink = [&](const std::set<int>& s) {
        for (int q : s)
            if (m.finals.count(q)) {
                bool any_letter = false;
                for (const auto& t : m.transitions)
                    if (t.label && m.eps_closure({q}).count(t.from)) { any_letter = true; break; }
                if (!any_letter) return true;
            }
        return false;
    };

    std::vector<std::pair<Word, std::set<int>>> frontier;
    frontier.push_back({{}, m.eps_closure({m.initial})});
    while (!frontier.empty()) {
        std::vector<std::pair<Word, std::set<int>>> next;
        for (auto& [w, s] : frontier) {
            std::vector<Event> moves = letter_moves(s);
            BoundedWord bw{w, has_final_sink(s), !moves.empty()};
            out.push_back(bw);
            if (out.size() > cap)
                throw ExplosionGuard("bounded_words exceeded cap of " + std::to_string(cap));
            if (w.size() == max_len) continue;
            for (const Event& e : moves) {
                Word w2 = w;
                w2.push_back(e);
                next.push_back({std::move(w2), m.eps_closure(m.step_letter(s, e))});
            }
        }
        frontier = std::move(next);
    }
    return out;
}

// Replaces every letter outside `keep` with epsilon.
inline StateMachine project_alphabet(StateMachine m, const std::set<Event>& keep) {
    for (auto& t : m.transitions)
        if (t.label && !keep.count(*t.label)) t.label = std::nullopt;
    return m;
}

// Keeps only the events performed by `r`.
inline StateMachine project_to_role(const StateMachine& m, const Role& r) {
    std::set<Event> keep;
    for (const Event& e : m.alphabet())
        if (active_role(e) == r) keep.insert(e);
    return project_alphabet(m, keep);
}

inline Word project_word(const Word& w, const Role& r) {
    Word out;
    for (const Event& e : w)
        if (active_role(e) == r) out.push_back(e);
    return out;
}

inline StateMachine epsilon_eliminate(const StateMachine& m) {
    StateMachine out;
    out.initial = m.initial;
    out.states = m.states;
    out.names = m.names;
    for (int s : m.states) {
        std::set<int> cl = m.eps_closure({s});
        for (int q : cl) {
            if (m.finals.count(q)) out.finals.insert(s);
            for (const auto& t : m.transitions)
                if (t.from == q && t.label) out.transitions.push_back({s, t.label, t.to});
        }
    }
    // Drop states unreachable from the initial state.
    std::set<int> reach{out.initial};
    std::vector<int> stack{out.initial};
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        for (const auto& t : out.transitions)
            if (t.from == q && reach.insert(t.to).second) stack.push_back(t.to);
    }
    StateMachine pruned;
    pruned.initial = out.initial;
    for (int s : reach) {
        pruned.states.insert(s);
        if (out.finals.count(s)) pruned.finals.insert(s);
        auto it = out.names.find(s);
        if (it != out.names.end()) pruned.names[s] = it->second;
    }
    for (const auto& t : out.transitions)
        if (reach.count(t.from)) pruned.transitions.push_back(t);
    return pruned;
}

inline std::string to_dot(const StateMachine& m, const std::string& name) {
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    os << "  rankdir=LR;\n";
    os << "  __start [shape=point];\n";
    for (int s : m.states) {
        os << "  s" << s << " [shape=" << (m.finals.count(s) ? "doublecircle" : "circle");
        auto it = m.names.find(s);
        if (it != m.names.end()) os << ", label=\"" << it->second << "\"";
        os << "];\n";
    }
    os << "  __start -> s" << m.initial << ";\n";
    for (const auto& t : m.transitions) {
        os << "  s" << t.from << " -> s" << t.to << " [label=\""
           << (t.label ? to_string(*t.label) : std::string("ε")) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mstproj
