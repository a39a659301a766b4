#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chase/decimal.hpp"

namespace chase {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PromptTemplate {
    std::string name;
    std::string system_text;
    std::string body;
    std::vector<std::string> placeholders;
};

// Exact substitution of {NAME} placeholders. Missing or extra bindings
// are errors so template drift is caught at the call site.
std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& bindings);

enum class FieldKind { line, block, list, boolean, number, code };

struct FieldSpec {
    std::string label;
    FieldKind kind = FieldKind::line;
    bool optional = false;
};

// Repeated sub-record whose labels carry an integer index,
// e.g. "Document 1 Title:", "Document 2 Title:".
struct GroupSpec {
    std::string prefix;            // "Document"
    std::vector<FieldSpec> fields; // labels relative to the prefix: "Title"
};

struct FormatSpec {
    std::vector<FieldSpec> fields;
    std::optional<GroupSpec> group;
};

struct ParsedRecord {
    std::map<std::string, std::string> values;
    std::vector<std::map<std::string, std::string>> groups;  // ordered by index
};

// Line-anchored, case-insensitive label matching. Leading markdown
// emphasis ("**", "- ") is stripped before matching; block fields consume
// lines until the next known label.
ParsedRecord parse_record(const FormatSpec& format, const std::string& text);

// Inverse of parse_record for fixture construction.
std::string emit_record(const FormatSpec& format, const ParsedRecord& record);

struct VerdictStyle {
    enum Kind { labeled, first_word } kind = first_word;
    std::string label;  // for labeled

    static VerdictStyle Labeled(std::string l) { return {labeled, std::move(l)}; }
    static VerdictStyle FirstWord() { return {first_word, {}}; }
};

// True/False extraction; anything else throws ParseError (callers treat a
// parse failure as verification failure, never success).
bool parse_verdict(const std::string& text, const VerdictStyle& style);

// Last "The answer is"/"####" marker; commas, currency symbols and
// trailing punctuation stripped from the numeral.
Decimal parse_final_number(const std::string& text);

// First triple-backtick fence (language tag dropped), else trimmed text.
std::string extract_code_block(const std::string& text);

// Template file: "placeholders:" header line, then "@system"/"@body"
// sections. Name is the file stem.
PromptTemplate load_template_file(const std::string& path);
std::map<std::string, PromptTemplate> load_prompt_library(const std::string& dir);

namespace strings {
std::string trim(const std::string& s);
std::string lower(const std::string& s);
std::vector<std::string> split_lines(const std::string& s);
// Bullet lines ("- foo") extracted in order; non-bullet lines ignored.
std::vector<std::string> bullet_points(const std::string& block);
std::size_t word_count(const std::string& s);
}  // namespace strings

}  // namespace chase
