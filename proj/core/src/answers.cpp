#include "steerkit/answers.hpp"

#include <cctype>

#include "steerkit/error.hpp"

namespace steerkit {

const char* answer_kind_name(AnswerKind kind) {
    switch (kind) {
        case AnswerKind::Integer: return "integer";
        case AnswerKind::BoxedExpression: return "boxed_expression";
        case AnswerKind::ChoiceLetter: return "choice_letter";
    }
    return "integer";
}

AnswerKind answer_kind_from_name(const std::string& name) {
    if (name == "integer") return AnswerKind::Integer;
    if (name == "boxed_expression") return AnswerKind::BoxedExpression;
    if (name == "choice_letter") return AnswerKind::ChoiceLetter;
    throw Error(ErrorCode::ConfigError, "unknown answer kind: " + name);
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Position just past the colon of the last "Answer [spaces] :" marker, or npos.
size_t find_last_marker(const std::string& text) {
    const std::string word = "Answer";
    size_t best = std::string::npos;
    size_t pos = text.find(word);
    while (pos != std::string::npos) {
        size_t p = pos + word.size();
        while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
        if (p < text.size() && text[p] == ':') best = p + 1;
        pos = text.find(word, pos + 1);
    }
    return best;
}

// first integer in the span; a '-' as the nearest preceding non-space char
// negates it, commas inside the digit run are thousands separators
std::optional<std::string> canonical_integer(const std::string& span) {
    size_t start = span.size();
    for (size_t i = 0; i < span.size(); ++i) {
        if (is_digit(span[i])) {
            start = i;
            break;
        }
    }
    if (start == span.size()) return std::nullopt;

    bool negative = false;
    for (size_t i = start; i-- > 0;) {
        if (is_space(span[i])) continue;
        negative = span[i] == '-';
        break;
    }

    std::string digits;
    for (size_t i = start; i < span.size(); ++i) {
        if (is_digit(span[i]))
            digits.push_back(span[i]);
        else if (span[i] == ',')
            continue; // thousands separator
        else
            break;
    }
    size_t nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    if (negative && digits != "0") digits.insert(digits.begin(), '-');
    return digits;
}

// first standalone A-D (word boundaries on both sides), uppercased
std::optional<std::string> canonical_choice(const std::string& span) {
    for (size_t i = 0; i < span.size(); ++i) {
        char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(span[i])));
        if (upper < 'A' || upper > 'D') continue;
        bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(span[i - 1]));
        bool right_ok =
            i + 1 >= span.size() || !std::isalnum(static_cast<unsigned char>(span[i + 1]));
        if (left_ok && right_ok) return std::string(1, upper);
    }
    return std::nullopt;
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && is_space(s[a])) ++a;
    while (b > a && is_space(s[b - 1])) --b;
    return s.substr(a, b - a);
}

std::optional<std::string> canonical_boxed(const std::string& span) {
    std::string out = trim(span);
    if (out.empty()) return std::nullopt;
    return out;
}

// content of the last \boxed{...} with balanced braces, or nullopt
std::optional<std::string> last_boxed_content(const std::string& text) {
    const std::string open = "\\boxed{";
    size_t best = std::string::npos;
    size_t pos = text.find(open);
    while (pos != std::string::npos) {
        best = pos;
        pos = text.find(open, pos + 1);
    }
    if (best == std::string::npos) return std::nullopt;
    size_t start = best + open.size();
    int depth = 1;
    for (size_t i = start; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}') {
            --depth;
            if (depth == 0) return text.substr(start, i - start);
        }
    }
    return std::nullopt; // unbalanced
}

} // namespace

std::optional<std::string> canonicalize_span(AnswerKind kind, const std::string& span) {
    switch (kind) {
        case AnswerKind::Integer: return canonical_integer(span);
        case AnswerKind::ChoiceLetter: return canonical_choice(span);
        case AnswerKind::BoxedExpression: return canonical_boxed(span);
    }
    return std::nullopt;
}

std::optional<Answer> normalize_answer(const std::string& text, AnswerKind kind) {
    std::optional<std::string> canonical;
    if (kind == AnswerKind::BoxedExpression) {
        if (auto boxed = last_boxed_content(text)) canonical = canonical_boxed(*boxed);
    }
    if (!canonical) {
        size_t after = find_last_marker(text);
        if (after == std::string::npos) return std::nullopt;
        std::string span = text.substr(after);
        size_t eol = span.find('\n');
        if (kind == AnswerKind::BoxedExpression && eol != std::string::npos)
            span = span.substr(0, eol);
        canonical = canonicalize_span(kind, span);
    }
    if (!canonical) return std::nullopt;
    return Answer{*canonical, kind};
}

} // namespace steerkit
