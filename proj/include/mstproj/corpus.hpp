#pragma once

// Parametric protocol families used for benchmarking.

#include <stdexcept>
#include <string>

#include "syntax.hpp"

namespace mstproj {

// A client asks a server to dispatch a request to one of n workers; the
// chosen worker replies directly to the client.
inline GlobalPtr load_balancer(int n) {
    std::vector<GBranch> branches;
    for (int i = 1; i <= n; ++i) {
        Role w{"Worker" + std::to_string(i)};
        GlobalPtr reply = g_exchange(w, Role{"Client"}, Message{"reply"}, g_var("t"));
        branches.push_back({w, Message{"req"}, reply});
    }
    return g_rec("t", g_exchange(Role{"Client"}, Role{"Server"}, Message{"req"},
                                 g_choice(Role{"Server"}, std::move(branches))));
}

// A logger polls one of n backends per round; the polled backend also
// notifies the client directly, and a monitor tracks round starts.
inline GlobalPtr logging(int n) {
    Role c{"Client"}, l{"Logger"}, m{"Monitor"};
    std::vector<GBranch> branches;
    for (int i = 1; i <= n; ++i) {
        Role b{"Backend" + std::to_string(i)};
        GlobalPtr tail = g_exchange(b, l, Message{"log"},
                         g_exchange(l, b, Message{"ack"},
                         g_exchange(b, c, Message{"tick"}, g_var("t"))));
        branches.push_back({b, Message{"poll"}, tail});
    }
    GlobalPtr kick = g_exchange(c, l, Message{"start"},
                     g_exchange(l, m, Message{"up"},
                     g_exchange(m, l, Message{"go"},
                     g_exchange(l, c, Message{"ready"},
                     g_exchange(c, l, Message{"ok"},
                                g_choice(l, std::move(branches)))))));
    return g_rec("t", kick);
}

inline GlobalPtr generate_family(const std::string& name, int n) {
    if (n < 1) throw std::invalid_argument("family size must be positive");
    if (name == "load_balancer") return load_balancer(n);
    if (name == "logging") return logging(n);
    throw std::invalid_argument("unknown family: " + name);
}

} // namespace mstproj
