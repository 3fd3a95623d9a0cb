#pragma once

#include <optional>
#include <string>

namespace steerkit {

enum class AnswerKind { Integer, BoxedExpression, ChoiceLetter };

const char* answer_kind_name(AnswerKind kind);
AnswerKind answer_kind_from_name(const std::string& name); // throws ConfigError

struct Answer {
    std::string canonical;
    AnswerKind kind = AnswerKind::Integer;

    bool operator==(const Answer& o) const = default;
};

// Deterministic answer extraction, standing in for a model-driven formatting
// pass. Finds the last "Answer:" marker (spaces allowed before the colon;
// boxed answers may instead use the last \boxed{...} anywhere) and
// canonicalizes the span after it:
//   integer       - first integer in the span; commas stripped, leading
//                   zeros dropped, a directly preceding '-' negates
//                   ("Answer: 1,234" -> "1234")
//   choice_letter - first standalone A-D in the span, uppercased
//   boxed         - balanced-brace content of the last \boxed{...}, trimmed;
//                   falls back to the marker span up to end of line
// Returns nullopt when no extractable answer exists.
std::optional<Answer> normalize_answer(const std::string& text, AnswerKind kind);

// The span -> canonical step by itself; idempotent
// (canonicalize_span(kind, canonicalize_span(kind, s)) == canonicalize_span(kind, s)).
std::optional<std::string> canonicalize_span(AnswerKind kind, const std::string& span);

} // namespace steerkit
