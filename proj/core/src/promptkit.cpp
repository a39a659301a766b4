#include "chase/promptkit.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace chase {

namespace strings {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : s) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
    return lines;
}

std::vector<std::string> bullet_points(const std::string& block) {
    std::vector<std::string> out;
    for (const auto& raw : split_lines(block)) {
        std::string line = trim(raw);
        if (line.rfind("- ", 0) == 0)
            out.push_back(trim(line.substr(2)));
        else if (line.rfind("* ", 0) == 0)
            out.push_back(trim(line.substr(2)));
    }
    return out;
}

std::size_t word_count(const std::string& s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool ws = std::isspace(static_cast<unsigned char>(c));
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

}  // namespace strings

std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& bindings) {
    for (const auto& [name, _] : bindings) {
        if (std::find(tpl.placeholders.begin(), tpl.placeholders.end(), name) ==
            tpl.placeholders.end())
            throw ParseError("template '" + tpl.name + "': binding for undeclared placeholder '" +
                             name + "'");
    }
    std::string out;
    out.reserve(tpl.body.size());
    std::size_t i = 0;
    while (i < tpl.body.size()) {
        if (tpl.body[i] == '{') {
            std::size_t close = tpl.body.find('}', i);
            if (close != std::string::npos) {
                std::string name = tpl.body.substr(i + 1, close - i - 1);
                if (std::find(tpl.placeholders.begin(), tpl.placeholders.end(), name) !=
                    tpl.placeholders.end()) {
                    auto it = bindings.find(name);
                    if (it == bindings.end())
                        throw ParseError("template '" + tpl.name + "': missing binding for '" +
                                         name + "'");
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tpl.body[i]);
        ++i;
    }
    return out;
}

namespace {

// Leading markdown emphasis markers stripped before label matching.
std::string strip_markdown(const std::string& line) {
    std::string s = strings::trim(line);
    while (true) {
        if (s.rfind("**", 0) == 0) {
            s = s.substr(2);
        } else if (s.rfind("- ", 0) == 0) {
            s = s.substr(2);
        } else if (s.rfind("#", 0) == 0) {
            s = s.substr(1);
        } else {
            break;
        }
        s = strings::trim(s);
    }
    return s;
}

bool iequals_prefix(const std::string& line, const std::string& prefix, std::size_t& end) {
    if (line.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(line[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    end = prefix.size();
    return true;
}

// Matches "<label>:" at line start; on success returns the text after ':'.
bool match_label(const std::string& line, const std::string& label, std::string& rest) {
    std::size_t end = 0;
    if (!iequals_prefix(line, label, end)) return false;
    while (end < line.size() && line[end] == ' ') ++end;
    if (end >= line.size() || line[end] != ':') return false;
    ++end;
    rest = line.substr(end);
    if (rest.rfind("**", 0) == 0) rest = rest.substr(2);
    rest = strings::trim(rest);
    if (rest.size() >= 2 && rest.substr(rest.size() - 2) == "**")
        rest = strings::trim(rest.substr(0, rest.size() - 2));
    return true;
}

struct LabelHit {
    bool is_group = false;
    std::string label;   // field label (relative for groups)
    int index = -1;      // group index
    std::string inline_value;
    FieldKind kind = FieldKind::line;
};

bool match_any_label(const FormatSpec& format, const std::string& raw_line, LabelHit& hit) {
    std::string line = strip_markdown(raw_line);
    for (const auto& f : format.fields) {
        std::string rest;
        if (match_label(line, f.label, rest)) {
            hit = {false, f.label, -1, rest, f.kind};
            return true;
        }
    }
    if (format.group) {
        std::size_t end = 0;
        if (iequals_prefix(line, format.group->prefix, end)) {
            std::size_t i = end;
            while (i < line.size() && line[i] == ' ') ++i;
            std::size_t dstart = i;
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
            if (i > dstart) {
                int index = std::stoi(line.substr(dstart, i - dstart));
                while (i < line.size() && line[i] == ' ') ++i;
                std::string tail = line.substr(i);
                for (const auto& f : format.group->fields) {
                    std::string rest;
                    if (match_label(tail, f.label, rest)) {
                        if (index < 1)
                            throw ParseError("malformed repetition index in line: " + raw_line);
                        hit = {true, f.label, index, rest, f.kind};
                        return true;
                    }
                }
            }
        }
    }
    return false;
}

bool is_multiline(FieldKind k) {
    return k == FieldKind::block || k == FieldKind::list || k == FieldKind::code;
}

}  // namespace

ParsedRecord parse_record(const FormatSpec& format, const std::string& text) {
    ParsedRecord rec;
    std::map<int, std::map<std::string, std::string>> groups;

    std::string* current = nullptr;
    FieldKind current_kind = FieldKind::line;

    for (const auto& raw : strings::split_lines(text)) {
        LabelHit hit;
        if (match_any_label(format, raw, hit)) {
            std::string* slot;
            if (hit.is_group) {
                slot = &groups[hit.index][hit.label];
            } else {
                slot = &rec.values[hit.label];
            }
            *slot = hit.inline_value;
            current = slot;
            current_kind = hit.kind;
        } else if (current && is_multiline(current_kind)) {
            if (!current->empty()) current->push_back('\n');
            *current += raw;
        }
    }

    for (auto& [k, v] : rec.values) v = strings::trim(v);
    for (auto& [idx, fields] : groups)
        for (auto& [k, v] : fields) v = strings::trim(v);

    auto found_labels = [&]() {
        std::string s;
        for (const auto& [k, _] : rec.values) s += (s.empty() ? "" : ", ") + k;
        return s.empty() ? std::string("<none>") : s;
    };

    for (const auto& f : format.fields) {
        if (!f.optional && rec.values.find(f.label) == rec.values.end())
            throw ParseError("missing mandatory label '" + f.label +
                             "'; found labels: " + found_labels());
    }
    if (format.group) {
        for (const auto& [idx, fields] : groups) {
            for (const auto& f : format.group->fields) {
                if (!f.optional && fields.find(f.label) == fields.end())
                    throw ParseError("group " + format.group->prefix + " " + std::to_string(idx) +
                                     " missing mandatory label '" + f.label + "'");
            }
        }
        for (auto& [idx, fields] : groups) rec.groups.push_back(std::move(fields));
    }
    return rec;
}

std::string emit_record(const FormatSpec& format, const ParsedRecord& record) {
    std::ostringstream out;
    for (const auto& f : format.fields) {
        auto it = record.values.find(f.label);
        if (it == record.values.end()) continue;
        out << f.label << ": " << it->second << "\n";
    }
    if (format.group) {
        int idx = 1;
        for (const auto& g : record.groups) {
            out << "\n";
            for (const auto& f : format.group->fields) {
                auto it = g.find(f.label);
                if (it == g.end()) continue;
                out << format.group->prefix << " " << idx << " " << f.label << ": " << it->second
                    << "\n";
            }
            ++idx;
        }
    }
    return out.str();
}

bool parse_verdict(const std::string& text, const VerdictStyle& style) {
    std::string scope = text;
    if (style.kind == VerdictStyle::labeled) {
        bool found = false;
        for (const auto& raw : strings::split_lines(text)) {
            std::string line = strip_markdown(raw);
            std::string rest;
            if (match_label(line, style.label, rest)) {
                scope = rest;
                found = true;
                break;
            }
        }
        if (!found)
            throw ParseError("verdict label '" + style.label + "' not found");
    }
    // First alphabetic token.
    std::string token;
    for (char c : scope) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            token.push_back(c);
        } else if (!token.empty()) {
            break;
        }
    }
    std::string t = strings::lower(token);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ParseError("verdict token is neither True nor False: '" + token + "'");
}

Decimal parse_final_number(const std::string& text) {
    auto find_last_ci = [&](const std::string& needle) -> std::size_t {
        std::string hay = strings::lower(text);
        std::string n = strings::lower(needle);
        std::size_t pos = hay.rfind(n);
        return pos == std::string::npos ? std::string::npos : pos + n.size();
    };
    std::size_t a = find_last_ci("the answer is");
    std::size_t b = find_last_ci("####");
    std::size_t start;
    if (a == std::string::npos && b == std::string::npos)
        throw ParseError("no final-answer marker found");
    if (a == std::string::npos)
        start = b;
    else if (b == std::string::npos)
        start = a;
    else
        start = std::max(a, b);

    // Skip whitespace and currency symbols; collect the numeral token.
    std::size_t i = start;
    while (i < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '$' ||
            text[i] == '*'))
        ++i;
    std::string token;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) token.push_back(text[i++]);
    while (i < text.size()) {
        char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',') {
            token.push_back(c);
            ++i;
        } else {
            break;
        }
    }
    // Strip commas and trailing punctuation.
    std::string cleaned;
    for (char c : token)
        if (c != ',') cleaned.push_back(c);
    // A single trailing dot is sentence punctuation: "8." -> "8",
    // "12.5." -> "12.5".
    if (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
    auto d = Decimal::parse(cleaned);
    if (!d) throw ParseError("no numeral after final-answer marker");
    return *d;
}

std::string extract_code_block(const std::string& text) {
    std::string result;
    std::size_t fence = text.find("```");
    if (fence != std::string::npos) {
        std::size_t line_end = text.find('\n', fence);
        if (line_end == std::string::npos) throw ParseError("empty code fence");
        std::size_t close = text.find("```", line_end + 1);
        result = close == std::string::npos ? text.substr(line_end + 1)
                                            : text.substr(line_end + 1, close - line_end - 1);
    } else {
        result = text;
    }
    result = strings::trim(result);
    if (result.empty()) throw ParseError("extracted code block is empty");
    return result;
}

PromptTemplate load_template_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open template file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto lines = strings::split_lines(ss.str());
    if (lines.empty() || lines[0].rfind("placeholders:", 0) != 0)
        throw ParseError("template file missing placeholders header: " + path);

    PromptTemplate tpl;
    tpl.name = std::filesystem::path(path).stem().string();
    std::istringstream header(lines[0].substr(std::string("placeholders:").size()));
    std::string name;
    while (header >> name) tpl.placeholders.push_back(name);

    enum { none, system, body } section = none;
    std::string system_text, body_text;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        if (l == "@system") {
            section = system;
        } else if (l == "@body") {
            section = body;
        } else if (section == system) {
            system_text += l + "\n";
        } else if (section == body) {
            body_text += l + "\n";
        }
    }
    tpl.system_text = strings::trim(system_text);
    if (!body_text.empty() && body_text.back() == '\n') body_text.pop_back();
    tpl.body = body_text;
    return tpl;
}

std::map<std::string, PromptTemplate> load_prompt_library(const std::string& dir) {
    std::map<std::string, PromptTemplate> lib;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        PromptTemplate tpl = load_template_file(entry.path().string());
        lib[tpl.name] = std::move(tpl);
    }
    if (lib.empty()) throw std::runtime_error("no templates found in " + dir);
    return lib;
}

}  // namespace chase
