#pragma once

#include <string>
#include <vector>

#include "basisc/diag.hpp"

namespace basisc {

struct Token {
    enum class Kind {
        Ident,
        Keyword,
        Int,
        Float,
        QubitStr,  // contents of a '...' literal, quotes stripped
        BitStr,    // contents of a 0b... literal
        Op,        // operators and punctuation, lexeme holds the spelling
        End,
    };

    Kind kind = Kind::End;
    std::string lexeme;
    long long int_value = 0;
    double float_value = 0.0;
    Span span;

    bool is_kw(const char *kw) const {
        return kind == Kind::Keyword && lexeme == kw;
    }
    bool is_op(const char *op) const {
        return kind == Kind::Op && lexeme == op;
    }
};

// Tokenizes a source string. `#` starts a comment running to end of line.
// Throws LexError on characters outside the grammar and on qubit strings
// containing symbols other than 0 1 + - i j.
std::vector<Token> lex(const std::string &source);

} // namespace basisc
