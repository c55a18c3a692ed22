#pragma once

// Source text handling and structured diagnostics. Diagnostics carry the
// verbatim token spelling; the canonical formatted line upper-cases it the
// way classical planner parsers echo tokens.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace pddlkit {

enum class FileKind { DF, PF };

inline const char* file_kind_name(FileKind k) {
    return k == FileKind::DF ? "DF" : "PF";
}

/// "domain" / "problem", the prefix used in solver-style messages.
inline const char* file_kind_label(FileKind k) {
    return k == FileKind::DF ? "domain" : "problem";
}

enum class Severity { error, warning };

enum class DiagCategory { lex, structure, arity, typing, naming };

inline const char* category_name(DiagCategory c) {
    switch (c) {
    case DiagCategory::lex: return "lex";
    case DiagCategory::structure: return "structure";
    case DiagCategory::arity: return "arity";
    case DiagCategory::typing: return "typing";
    case DiagCategory::naming: return "naming";
    }
    return "?";
}

/// A PDDL file held as raw text with a per-line byte offset index.
/// Lines are 1-based everywhere diagnostics mention them.
class SourceFile {
public:
    SourceFile() = default;
    SourceFile(FileKind kind, std::string text) : kind_(kind), text_(std::move(text)) {
        line_offsets_.push_back(0);
        for (std::size_t i = 0; i < text_.size(); ++i) {
            if (text_[i] == '\n') line_offsets_.push_back(i + 1);
        }
    }

    FileKind kind() const { return kind_; }
    const std::string& text() const { return text_; }
    int line_count() const { return static_cast<int>(line_offsets_.size()); }
    const std::vector<std::size_t>& line_offsets() const { return line_offsets_; }

    /// Text of 1-based line n, without the trailing newline.
    std::string line_text(int n) const {
        if (n < 1 || n > line_count()) return {};
        std::size_t begin = line_offsets_[static_cast<std::size_t>(n) - 1];
        std::size_t end = (n < line_count()) ? line_offsets_[static_cast<std::size_t>(n)] : text_.size();
        while (end > begin && (text_[end - 1] == '\n' || text_[end - 1] == '\r')) --end;
        return text_.substr(begin, end - begin);
    }

private:
    FileKind kind_ = FileKind::DF;
    std::string text_;
    std::vector<std::size_t> line_offsets_{0};
};

/// One solver-style finding. `token` is the offending token exactly as it
/// appears in the source line.
struct Diagnostic {
    FileKind file = FileKind::DF;
    int line = 1;
    std::string token;
    std::string message;
    DiagCategory category = DiagCategory::structure;
    Severity severity = Severity::error;
};

inline std::string to_upper_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

inline std::string to_lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Canonical human-readable line, e.g.
///   domain: syntax error in line 12, ':PRECONDITIONS': domain definition expected
/// The token is echoed upper-cased, matching classical solver output.
inline std::string format_diagnostic(const Diagnostic& d) {
    std::string out = file_kind_label(d.file);
    out += d.severity == Severity::warning ? ": warning in line " : ": syntax error in line ";
    out += std::to_string(d.line);
    out += ", '";
    out += to_upper_copy(d.token);
    out += "': ";
    out += d.message;
    return out;
}

/// Machine-readable record, one object per diagnostic.
inline nlohmann::json diagnostic_to_json(const Diagnostic& d) {
    return nlohmann::json{
        {"file", file_kind_name(d.file)},
        {"line", d.line},
        {"token", d.token},
        {"category", category_name(d.category)},
        {"message", d.message},
        {"severity", d.severity == Severity::warning ? "warning" : "error"},
    };
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::error; });
}

} // namespace pddlkit
