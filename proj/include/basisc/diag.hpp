#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace basisc {

// Source position, 1-based. line == 0 means "no position available".
// Spans are diagnostics metadata: two spans always compare equal so that
// structural equality of AST nodes ignores source layout.
struct Span {
    int line = 0;
    int col = 0;

    bool known() const { return line > 0; }
    bool operator==(const Span &) const { return true; }
};

std::string span_str(const Span &s);

// Exit-code-1 family: problems reading or parsing source text.
struct IoError : std::runtime_error {
    explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

struct LexError : std::runtime_error {
    Span span;
    LexError(const std::string &msg, Span s)
        : std::runtime_error(msg + " at " + span_str(s)), span(s) {}
};

struct ParseError : std::runtime_error {
    Span span;
    std::vector<std::string> expected;
    ParseError(const std::string &msg, Span s, std::vector<std::string> exp = {})
        : std::runtime_error(msg + " at " + span_str(s)), span(s),
          expected(std::move(exp)) {}
};

// Exit-code-2 family: the program is well-formed text but ill-typed. The code
// string is part of the CLI contract and must stay stable.
struct TypeError : std::runtime_error {
    std::string code;
    Span span;
    TypeError(std::string code_, const std::string &msg, Span s = {})
        : std::runtime_error("[" + code_ + "] " + msg +
                             (s.known() ? " at " + span_str(s) : "")),
          code(std::move(code_)), span(s) {}
};

// Exit-code-3 family: failures while lowering or simulating a checked program.
struct RunError : std::runtime_error {
    std::string code;
    RunError(std::string code_, const std::string &msg)
        : std::runtime_error("[" + code_ + "] " + msg), code(std::move(code_)) {}
};

} // namespace basisc
