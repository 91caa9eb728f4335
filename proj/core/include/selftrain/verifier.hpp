#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "selftrain/dataset.hpp"

namespace selftrain {

enum class ExtractionMethod {
    BoxedExtraction,  // answer taken from the last \boxed{...} span
    LastNumber,       // no box; the last numeric token in the response
    Exact,            // fallback: the whole canonicalized response
};

struct Verdict {
    bool correct = false;
    std::optional<std::string> extracted_answer;
    ExtractionMethod method = ExtractionMethod::Exact;
};

// Strips whitespace, '$' and ',' from an answer string.
std::string canonicalize_answer(std::string_view raw);

// Parses a canonicalized answer as a decimal or a/b rational.
std::optional<double> parse_numeric(std::string_view canonical);

// Last \boxed{...} span with balanced braces, content verbatim.
std::optional<std::string> extract_boxed(std::string_view text);

// Last numeric token ("42", "-3.5", "1e-3", "3/4").
std::optional<std::string> extract_last_number(std::string_view text);

// Canonicalizes both sides; numeric comparison at absolute tolerance 1e-9 when
// both parse, case-insensitive string equality otherwise.
bool answers_match(std::string_view expected, std::string_view candidate);

// Rule-based correctness verdict over a response's final answer. Never throws:
// an unextractable answer yields correct=false with no extracted_answer.
Verdict verify(const Problem& problem, std::string_view response_text);

const char* to_string(ExtractionMethod method);

}  // namespace selftrain
