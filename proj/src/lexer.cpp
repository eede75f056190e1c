#include "basisc/lexer.hpp"

#include <cctype>
#include <set>

namespace basisc {

namespace {

const std::set<std::string> kKeywords = {
    "qpu", "classical", "rev", "repeat", "in",
    "std", "pm", "ij", "fourier",
    "id", "discard", "discardz",
    "phase", "pi", "phases",
    "qubit", "bit", "basis", "qfunc", "rev_qfunc", "cfunc",
};

bool qubit_symbol(char c) {
    return c == '0' || c == '1' || c == '+' || c == '-' || c == 'i' || c == 'j';
}

} // namespace

std::vector<Token> lex(const std::string &src) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;

    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; k++) {
            if (src[i + k] == '\n') {
                line++;
                col = 1;
            } else {
                col++;
            }
        }
        i += n;
    };
    auto push = [&](Token::Kind kind, std::string lexeme, Span s) {
        Token t;
        t.kind = kind;
        t.lexeme = std::move(lexeme);
        t.span = s;
        out.push_back(std::move(t));
    };

    while (i < src.size()) {
        char c = src[i];
        Span here{line, col};
        if (c == '#') {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '\'') {
            size_t j = i + 1;
            std::string syms;
            while (j < src.size() && src[j] != '\'') {
                if (!qubit_symbol(src[j]))
                    throw LexError(std::string("invalid qubit symbol '") + src[j] + "'",
                                   Span{line, col + static_cast<int>(j - i)});
                syms += src[j];
                j++;
            }
            if (j >= src.size())
                throw LexError("unterminated qubit literal", here);
            if (syms.empty())
                throw LexError("empty qubit literal", here);
            push(Token::Kind::QubitStr, syms, here);
            advance(j - i + 1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            // 0b... bit literal
            if (c == '0' && i + 1 < src.size() && src[i + 1] == 'b') {
                size_t j = i + 2;
                std::string bits;
                while (j < src.size() && (src[j] == '0' || src[j] == '1')) {
                    bits += src[j];
                    j++;
                }
                if (bits.empty())
                    throw LexError("expected binary digits after 0b", here);
                push(Token::Kind::BitStr, bits, here);
                advance(j - i);
                continue;
            }
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                j++;
            bool is_float = false;
            if (j < src.size() && src[j] == '.' &&
                j + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                is_float = true;
                j++;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                    j++;
            }
            std::string text = src.substr(i, j - i);
            Token t;
            t.span = here;
            t.lexeme = text;
            if (is_float) {
                t.kind = Token::Kind::Float;
                t.float_value = std::stod(text);
            } else {
                t.kind = Token::Kind::Int;
                t.int_value = std::stoll(text);
            }
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                j++;
            std::string word = src.substr(i, j - i);
            push(kKeywords.count(word) ? Token::Kind::Keyword : Token::Kind::Ident,
                 word, here);
            advance(j - i);
            continue;
        }

        auto starts = [&](const char *s) {
            return src.compare(i, std::string::traits_type::length(s), s) == 0;
        };
        static const char *multi[] = {"[[", "]]", ">>", "...", "..", "->", "=="};
        bool matched = false;
        for (const char *m : multi) {
            if (starts(m)) {
                push(Token::Kind::Op, m, here);
                advance(std::string::traits_type::length(m));
                matched = true;
                break;
            }
        }
        if (matched)
            continue;
        static const std::string singles = "|+-*/^&~.:,()[]{}=";
        if (singles.find(c) != std::string::npos) {
            push(Token::Kind::Op, std::string(1, c), here);
            advance(1);
            continue;
        }
        throw LexError(std::string("unexpected character '") + c + "'", here);
    }

    Token end;
    end.kind = Token::Kind::End;
    end.span = Span{line, col};
    out.push_back(end);
    return out;
}

} // namespace basisc
