#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mstproj/avail.hpp"
#include "mstproj/parse.hpp"

using namespace mstproj;

namespace {

std::set<MessageId> run_avail(const GlobalPtr& root, std::set<Role> blocked,
                              const GlobalPtr& at) {
    return avail(blocked, {}, at, get_mu(root));
}

MessageId mid(const char* s, const char* r, const char* m) {
    return {Role{s}, Role{r}, Message{m}};
}

const char* kVariant =
    "mu t. Client->Server:req. + { "
    "Server->Worker1:req. Worker1->Client:reply. Worker1->Worker2:req. "
    "Worker2->Client:reply. t, "
    "Server->Worker2:req. Worker2->Client:reply. t }";

// Independent oracle: walks the traces the protocol can still perform while
// every role in `blocked` stays frozen (a blocked sender freezes its
// receivers transitively), unfolding each binder at most `unfold_limit`
// times.  It collects every message that can become the head of a channel
// into a blocked role: the receiver never consumes it, so along one path
// only the first message per channel qualifies.  All of these must be
// available messages.
void pending_heads(const GlobalPtr& g, std::set<Role> blocked,
                   std::set<std::pair<Role, Role>> used, const MuMap& mu,
                   std::map<std::string, int> unfolds, int unfold_limit,
                   std::set<MessageId>& out) {
    if (std::holds_alternative<GEnd>(g->node)) return;
    if (const auto* v = std::get_if<GVar>(&g->node)) {
        if (unfolds[v->var] >= unfold_limit) return;
        ++unfolds[v->var];
        pending_heads(mu.at(v->var), std::move(blocked), std::move(used), mu,
                      std::move(unfolds), unfold_limit, out);
        return;
    }
    if (const auto* r = std::get_if<GRec>(&g->node)) {
        pending_heads(r->body, std::move(blocked), std::move(used), mu, std::move(unfolds),
                      unfold_limit, out);
        return;
    }
    const auto& c = std::get<GChoice>(g->node);
    for (const auto& b : c.branches) {
        std::set<Role> blocked2 = blocked;
        std::set<std::pair<Role, Role>> used2 = used;
        if (!blocked.count(c.sender)) {
            if (used2.insert({c.sender, b.receiver}).second && blocked.count(b.receiver))
                out.insert({c.sender, b.receiver, b.message});
        } else {
            blocked2.insert(b.receiver);
        }
        pending_heads(b.continuation, blocked2, used2, mu, unfolds, unfold_limit, out);
    }
}

} // namespace

TEST_CASE("end and bound variables yield nothing") {
    GlobalPtr g = parse_global("mu t. p->q:m. t");
    MuMap mu = get_mu(g);
    CHECK(avail({Role{"r"}}, {}, g_end(), mu).empty());
    // Second visit of the same binder stops the unfolding.
    CHECK(avail({Role{"p"}}, {"t"}, g_var("t"), mu).empty());
}

TEST_CASE("unblocked sender contributes all branch heads") {
    GlobalPtr g = parse_global("+ { p->q:a. end, p->r:b. end }");
    CHECK(run_avail(g, {Role{"z"}}, g) ==
          std::set<MessageId>{mid("p", "q", "a"), mid("p", "r", "b")});
}

TEST_CASE("FIFO head filtering drops later messages on the same channel") {
    // The second message on (p,q) sits behind the first and is filtered out.
    GlobalPtr g = parse_global("p->q:a. p->q:b. end");
    CHECK(run_avail(g, {Role{"z"}}, g) == std::set<MessageId>{mid("p", "q", "a")});
    // On distinct channels both survive.
    GlobalPtr g2 = parse_global("p->q:a. p->r:b. end");
    CHECK(run_avail(g2, {Role{"z"}}, g2) ==
          std::set<MessageId>{mid("p", "q", "a"), mid("p", "r", "b")});
}

TEST_CASE("blocked sender freezes its receivers transitively") {
    GlobalPtr g = parse_global("p->q:a. q->r:b. r->s:c. end");
    CHECK(run_avail(g, {Role{"p"}}, g).empty());
    CHECK(run_avail(g, {Role{"q"}}, g) == std::set<MessageId>{mid("p", "q", "a")});
}

TEST_CASE("head_filter removes exactly one channel") {
    std::set<MessageId> s{mid("p", "q", "a"), mid("p", "q", "b"), mid("p", "r", "a")};
    CHECK(head_filter(s, Role{"p"}, Role{"q"}) == std::set<MessageId>{mid("p", "r", "a")});
}

TEST_CASE("variant tails: pending forwarded reply is visible to the blocked client") {
    GlobalPtr g = parse_global(kVariant);
    MuMap mu = get_mu(g);
    // Left tail after the client's first reception: the forwarding chain can
    // still run to completion while the client waits.
    // A subterm with a free variable: bypass the whole-type validation.
    GlobalPtr left_tail =
        detail::Parser("Worker1->Worker2:req. Worker2->Client:reply. t").global();
    CHECK(avail({Role{"Client"}}, {}, left_tail, mu) ==
          std::set<MessageId>{mid("Worker1", "Worker2", "req"),
                              mid("Worker2", "Client", "reply")});
    // Right tail (the loop restart): nothing can move while the client waits,
    // because the client itself must start the next round.
    CHECK(avail({Role{"Client"}}, {}, g_var("t"), mu).empty());
}

TEST_CASE("availability counter counts top-level evaluations") {
    GlobalPtr g = parse_global(kVariant);
    MuMap mu = get_mu(g);
    size_t n = 0;
    avail({Role{"Client"}}, {}, g, mu, &n);
    avail({Role{"Client"}}, {}, g, mu, &n);
    CHECK(n == 2);
}

TEST_CASE("oracle: channel heads pending for blocked roles are available") {
    std::vector<const char*> specimens = {
        kVariant,
        "mu t. p->q:m. t",
        "+ { p->q:a. q->r:b. end, p->r:c. end }",
        "+ { p->r:a. r->p:a. p->q:a. q->r:b. end, p->q:a. q->r:b. end }",
        "mu x. + { q->t:l. q->p:l. t->s:l. s->r:l. r->p:l. x, "
        "q->t:r. q->p:r. t->r:r. r->p:r. x }",
    };
    for (const char* src : specimens) {
        GlobalPtr g = parse_global(src);
        MuMap mu = get_mu(g);
        int unfold_limit = static_cast<int>(roles_of(g).size());
        std::set<Role> roles = roles_of(g);
        std::vector<std::set<Role>> blocked_sets;
        for (const Role& r : roles) blocked_sets.push_back({r});
        for (const Role& r1 : roles)
            for (const Role& r2 : roles)
                if (r1 < r2) blocked_sets.push_back({r1, r2});
        for (const auto& blocked : blocked_sets) {
            std::set<MessageId> oracle;
            pending_heads(g, blocked, {}, mu, {}, unfold_limit, oracle);
            std::set<MessageId> computed = avail(blocked, {}, g, mu);
            for (const MessageId& m : oracle) {
                INFO(src, " missing ", to_string(m));
                CHECK(computed.count(m) == 1);
            }
        }
    }
}
