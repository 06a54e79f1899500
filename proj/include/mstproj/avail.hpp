#pragma once

// Available messages: the set of messages that can still be emitted while
// every role in `blocked` is stuck waiting.  Blocking is transitive: when a
// blocked role is the sender of an exchange, its receivers become blocked
// too.  FIFO order is respected per channel: a message emitted behind an
// earlier message on the same channel shadows nothing ahead of it, so the
// continuation's contributions on that channel are filtered out.

#include <set>
#include <string>

#include "syntax.hpp"

namespace mstproj {

struct MessageId {
    Role sender;
    Role receiver;
    Message message;
    auto operator<=>(const MessageId&) const = default;
};

inline std::string to_string(const MessageId& m) {
    return m.sender.name + "->" + m.receiver.name + "?" + m.message.label;
}

// Drops every message travelling on the channel (sender, receiver).
inline std::set<MessageId> head_filter(std::set<MessageId> msgs, const Role& sender,
                                       const Role& receiver) {
    for (auto it = msgs.begin(); it != msgs.end();) {
        if (it->sender == sender && it->receiver == receiver) it = msgs.erase(it);
        else ++it;
    }
    return msgs;
}

namespace detail {

inline std::set<MessageId> avail_impl(const std::set<Role>& blocked,
                                      std::set<std::string> visited, const GlobalPtr& g,
                                      const MuMap& mu, size_t* eval_counter) {
    if (std::holds_alternative<GEnd>(g->node)) return {};
    if (const auto* r = std::get_if<GRec>(&g->node)) {
        visited.insert(r->var);
        return avail_impl(blocked, std::move(visited), r->body, mu, eval_counter);
    }
    if (const auto* v = std::get_if<GVar>(&g->node)) {
        if (visited.count(v->var)) return {};
        visited.insert(v->var);
        return avail_impl(blocked, std::move(visited), mu.at(v->var), mu, eval_counter);
    }
    const auto& c = std::get<GChoice>(g->node);
    std::set<MessageId> out;
    if (!blocked.count(c.sender)) {
        for (const auto& b : c.branches) {
            std::set<MessageId> sub =
                avail_impl(blocked, visited, b.continuation, mu, eval_counter);
            sub = head_filter(std::move(sub), c.sender, b.receiver);
            sub.insert({c.sender, b.receiver, b.message});
            out.merge(sub);
        }
    } else {
        for (const auto& b : c.branches) {
            std::set<Role> blocked2 = blocked;
            blocked2.insert(b.receiver);
            out.merge(avail_impl(blocked2, visited, b.continuation, mu, eval_counter));
        }
    }
    return out;
}

} // namespace detail

inline std::set<MessageId> avail(const std::set<Role>& blocked, std::set<std::string> visited,
                                 const GlobalPtr& g, const MuMap& mu,
                                 size_t* eval_counter = nullptr) {
    if (eval_counter) ++*eval_counter;
    return detail::avail_impl(blocked, std::move(visited), g, mu, nullptr);
}

} // namespace mstproj
