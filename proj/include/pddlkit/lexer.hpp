#pragma once

// S-expression lexer shared by the domain and problem parsers.
// ';' starts a comment running to end of line.

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "pddlkit/source.hpp"

namespace pddlkit::syntax::detail {

struct Token {
    enum class Kind { lparen, rparen, symbol, end };
    Kind kind = Kind::end;
    std::string text;  // verbatim spelling; empty for end
    int line = 1;
};

inline bool is_symbol_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '?' ||
           c == ':' || c == '.' || c == '=';
}

/// Tokenizes the whole input. On an illegal character a single lex
/// diagnostic is produced and lexing stops.
inline std::optional<Diagnostic> lex(const SourceFile& src, std::vector<Token>& out) {
    const std::string& text = src.text();
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(') {
            out.push_back({Token::Kind::lparen, "(", line});
            ++i;
        } else if (c == ')') {
            out.push_back({Token::Kind::rparen, ")", line});
            ++i;
        } else if (is_symbol_char(c)) {
            std::size_t start = i;
            while (i < text.size() && is_symbol_char(text[i])) ++i;
            out.push_back({Token::Kind::symbol, text.substr(start, i - start), line});
        } else {
            return Diagnostic{src.kind(), line, std::string(1, c), "illegal character, token expected",
                              DiagCategory::lex, Severity::error};
        }
    }
    out.push_back({Token::Kind::end, "", line});
    return std::nullopt;
}

} // namespace pddlkit::syntax::detail
