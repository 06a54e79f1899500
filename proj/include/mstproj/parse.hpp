#pragma once

// Recursive-descent parser for the textual syntax of global (.gt) and
// local (.lt) types.
//
//   G ::= end | p->q:m. G | + { G1, G2, ... } | mu t. G | t
//   L ::= end | q!m. L | q?m. L | (+) { L1, ... } | & { L1, ... } | mu t. L | t
//
// '#' starts a line comment.  All branches of a '+' must share one sender.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "syntax.hpp"

namespace mstproj {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(std::string msg, int line_, int col_)
        : std::runtime_error(msg + " at line " + std::to_string(line_) + ", column " +
                             std::to_string(col_)),
          line(line_), col(col_) {}
};

namespace detail {

struct Token {
    enum class Kind { Ident, Arrow, Colon, Dot, Plus, InternalMark, Amp, LBrace, RBrace, Comma,
                      Bang, Query, End };
    Kind kind;
    std::string text;
    int line, col;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Token::Kind k, std::string t, int l, int c) {
        out.push_back({k, std::move(t), l, c});
    };
    while (i < src.size()) {
        char ch = src[i];
        if (ch == '\n') { ++line; col = 1; ++i; continue; }
        if (std::isspace(static_cast<unsigned char>(ch))) { ++col; ++i; continue; }
        if (ch == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        int l = line, c = col;
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            push(Token::Kind::Ident, src.substr(i, j - i), l, c);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (ch == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            push(Token::Kind::Arrow, "->", l, c);
            i += 2; col += 2; continue;
        }
        if (ch == '(' && i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
            push(Token::Kind::InternalMark, "(+)", l, c);
            i += 3; col += 3; continue;
        }
        Token::Kind k;
        switch (ch) {
            case ':': k = Token::Kind::Colon; break;
            case '.': k = Token::Kind::Dot; break;
            case '+': k = Token::Kind::Plus; break;
            case '&': k = Token::Kind::Amp; break;
            case '{': k = Token::Kind::LBrace; break;
            case '}': k = Token::Kind::RBrace; break;
            case ',': k = Token::Kind::Comma; break;
            case '!': k = Token::Kind::Bang; break;
            case '?': k = Token::Kind::Query; break;
            default:
                throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
        }
        push(k, std::string(1, ch), l, c);
        ++i; ++col;
    }
    out.push_back({Token::Kind::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& src) : toks_(lex(src)) {}

    GlobalPtr global() {
        GlobalPtr g = parse_global();
        expect(Token::Kind::End, "end of input");
        return g;
    }

    LocalPtr local() {
        LocalPtr l = parse_local();
        expect(Token::Kind::End, "end of input");
        return l;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& peek(size_t k = 0) const {
        size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_++]; }
    bool at(Token::Kind k, size_t ahead = 0) const { return peek(ahead).kind == k; }
    const Token& expect(Token::Kind k, const char* what) {
        if (!at(k)) throw ParseError(std::string("expected ") + what, peek().line, peek().col);
        return toks_[pos_++];
    }

    GlobalPtr parse_global() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Plus) {
            advance();
            expect(Token::Kind::LBrace, "'{'");
            std::vector<GBranch> branches;
            Role sender;
            bool first = true;
            while (true) {
                auto [s, b] = parse_exchange_branch();
                if (first) { sender = s; first = false; }
                else if (s != sender)
                    throw ParseError("all branches of a choice must share one sender (" +
                                         sender.name + " vs " + s.name + ")",
                                     peek().line, peek().col);
                branches.push_back(std::move(b));
                if (at(Token::Kind::Comma)) { advance(); continue; }
                break;
            }
            expect(Token::Kind::RBrace, "'}'");
            return g_choice(sender, std::move(branches));
        }
        if (t.kind == Token::Kind::Ident) {
            if (t.text == "end") { advance(); return g_end(); }
            if (t.text == "mu") {
                advance();
                const Token& v = expect(Token::Kind::Ident, "recursion variable");
                expect(Token::Kind::Dot, "'.'");
                return g_rec(v.text, parse_global());
            }
            if (at(Token::Kind::Arrow, 1)) {
                auto [s, b] = parse_exchange_branch();
                return g_choice(s, {std::move(b)});
            }
            advance();
            return g_var(t.text);
        }
        throw ParseError("expected a global type", t.line, t.col);
    }

    std::pair<Role, GBranch> parse_exchange_branch() {
        const Token& s = expect(Token::Kind::Ident, "sender role");
        expect(Token::Kind::Arrow, "'->'");
        const Token& r = expect(Token::Kind::Ident, "receiver role");
        expect(Token::Kind::Colon, "':'");
        const Token& m = expect(Token::Kind::Ident, "message label");
        expect(Token::Kind::Dot, "'.'");
        GlobalPtr cont = parse_global();
        return {Role{s.text}, GBranch{Role{r.text}, Message{m.text}, std::move(cont)}};
    }

    LocalPtr parse_local() {
        const Token& t = peek();
        if (t.kind == Token::Kind::InternalMark || t.kind == Token::Kind::Amp) {
            bool internal = t.kind == Token::Kind::InternalMark;
            advance();
            expect(Token::Kind::LBrace, "'{'");
            std::vector<LBranch> branches;
            while (true) {
                branches.push_back(parse_action_branch(internal));
                if (at(Token::Kind::Comma)) { advance(); continue; }
                break;
            }
            expect(Token::Kind::RBrace, "'}'");
            return internal ? l_internal(std::move(branches)) : l_external(std::move(branches));
        }
        if (t.kind == Token::Kind::Ident) {
            if (t.text == "end") { advance(); return l_end(); }
            if (t.text == "mu") {
                advance();
                const Token& v = expect(Token::Kind::Ident, "recursion variable");
                expect(Token::Kind::Dot, "'.'");
                return l_rec(v.text, parse_local());
            }
            if (at(Token::Kind::Bang, 1))
                return l_internal({parse_action_branch(true)});
            if (at(Token::Kind::Query, 1))
                return l_external({parse_action_branch(false)});
            advance();
            return l_var(t.text);
        }
        throw ParseError("expected a local type", t.line, t.col);
    }

    LBranch parse_action_branch(bool internal) {
        const Token& peer = expect(Token::Kind::Ident, "peer role");
        expect(internal ? Token::Kind::Bang : Token::Kind::Query, internal ? "'!'" : "'?'");
        const Token& m = expect(Token::Kind::Ident, "message label");
        expect(Token::Kind::Dot, "'.'");
        return LBranch{Role{peer.text}, Message{m.text}, parse_local()};
    }
};

} // namespace detail

// Parses and rejects binding/guardedness violations with an exception so that
// downstream passes can assume a well-formed tree.  Branch clashes and
// self-communication are reported via validate().
inline GlobalPtr parse_global(const std::string& src) {
    GlobalPtr g = detail::Parser(src).global();
    for (const auto& issue : validate(g)) {
        switch (issue.kind) {
            case ValidationIssue::Kind::DuplicateRecVar:
                throw std::runtime_error("DuplicateRecVar: " + issue.detail);
            case ValidationIssue::Kind::UnboundVar:
                throw std::runtime_error("UnboundVar: " + issue.detail);
            case ValidationIssue::Kind::Unguarded:
                throw std::runtime_error("GuardednessError: " + issue.detail);
            default:
                break;
        }
    }
    return g;
}

inline LocalPtr parse_local(const std::string& src) {
    LocalPtr l = detail::Parser(src).local();
    for (const auto& issue : validate(l)) {
        switch (issue.kind) {
            case ValidationIssue::Kind::DuplicateRecVar:
                throw std::runtime_error("DuplicateRecVar: " + issue.detail);
            case ValidationIssue::Kind::UnboundVar:
                throw std::runtime_error("UnboundVar: " + issue.detail);
            case ValidationIssue::Kind::Unguarded:
                throw std::runtime_error("GuardednessError: " + issue.detail);
            default:
                break;
        }
    }
    return l;
}

} // namespace mstproj
