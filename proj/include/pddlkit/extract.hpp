#pragma once

// Pulls PDDL blocks out of free-form model output. A candidate is any
// parenthesis-balanced span starting at "(define" whose head continues with
// "(domain" or "(problem"; fenced code blocks need no special handling
// because the balanced scan runs over the raw text. When several blocks of
// the same kind appear, the last one wins (later output supersedes earlier
// drafts in practice).

#include <cctype>
#include <optional>
#include <string>

namespace pddlkit::syntax {

struct ExtractedPair {
    std::optional<std::string> df_text;
    std::optional<std::string> pf_text;
};

namespace detail {

// span of the balanced s-expression starting at text[start] == '('; returns
// one past the closing paren, or npos when unbalanced. ';' comments run to
// end of line, as in the lexer.
inline std::size_t balanced_end(const std::string& text, std::size_t start) {
    int depth = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
            if (i >= text.size()) break;
            continue;
        }
        if (c == '(') ++depth;
        if (c == ')') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string::npos;
}

// does text at `pos` (after skipping whitespace) open with "(<word>",
// case-insensitively?
inline bool opens_with(const std::string& text, std::size_t pos, const std::string& word) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || text[pos] != '(') return false;
    ++pos;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    for (char w : word) {
        if (pos >= text.size() ||
            std::tolower(static_cast<unsigned char>(text[pos])) != w)
            return false;
        ++pos;
    }
    // the word must end here (so "domainx" does not match "domain")
    return pos >= text.size() || !std::isalnum(static_cast<unsigned char>(text[pos]));
}

inline bool ci_match_at(const std::string& text, std::size_t pos, const std::string& word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
    return true;
}

} // namespace detail

inline ExtractedPair extract_pddl_blocks(const std::string& llm_text) {
    ExtractedPair result;
    std::size_t pos = 0;
    while (pos < llm_text.size()) {
        std::size_t open = llm_text.find('(', pos);
        if (open == std::string::npos) break;
        std::size_t after = open + 1;
        while (after < llm_text.size() &&
               std::isspace(static_cast<unsigned char>(llm_text[after])))
            ++after;
        if (!detail::ci_match_at(llm_text, after, "define")) {
            pos = open + 1;
            continue;
        }
        std::size_t end = detail::balanced_end(llm_text, open);
        if (end == std::string::npos) {
            pos = open + 1;
            continue;
        }
        std::size_t head = after + 6;  // past "define"
        if (detail::opens_with(llm_text, head, "domain"))
            result.df_text = llm_text.substr(open, end - open);
        else if (detail::opens_with(llm_text, head, "problem"))
            result.pf_text = llm_text.substr(open, end - open);
        pos = end;
    }
    return result;
}

} // namespace pddlkit::syntax
