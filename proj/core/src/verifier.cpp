#include "selftrain/verifier.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace selftrain {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Parses a plain decimal (optional sign, optional exponent). Consumes the
// whole string or fails.
std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::string canonicalize_answer(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '$' || c == ',') continue;
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(c);
    }
    return out;
}

std::optional<double> parse_numeric(std::string_view canonical) {
    if (canonical.empty()) return std::nullopt;
    const auto slash = canonical.find('/');
    if (slash != std::string_view::npos) {
        const auto num = parse_decimal(canonical.substr(0, slash));
        const auto den = parse_decimal(canonical.substr(slash + 1));
        if (!num || !den || *den == 0.0) return std::nullopt;
        return *num / *den;
    }
    return parse_decimal(canonical);
}

std::optional<std::string> extract_boxed(std::string_view text) {
    const std::string_view marker = "\\boxed{";
    std::size_t best = std::string_view::npos;
    for (std::size_t pos = text.find(marker); pos != std::string_view::npos;
         pos = text.find(marker, pos + 1)) {
        best = pos;
    }
    if (best == std::string_view::npos) return std::nullopt;

    // Balanced-brace scan so nested spans like \frac{1}{2} survive.
    std::size_t i = best + marker.size();
    int depth = 1;
    std::string content;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '{') ++depth;
        if (c == '}') {
            --depth;
            if (depth == 0) return content;
        }
        content.push_back(c);
    }
    return std::nullopt;  // unbalanced span
}

std::optional<std::string> extract_last_number(std::string_view text) {
    std::optional<std::string> last;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool digit_start = is_digit(text[i]);
        const bool dot_start =
            text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]);
        if (!digit_start && !dot_start) {
            ++i;
            continue;
        }

        std::size_t start = i;
        // Attach a sign when it is not part of an identifier or number run.
        if (start > 0 && (text[start - 1] == '-' || text[start - 1] == '+')) {
            const bool signed_ok =
                start == 1 || (!is_digit(text[start - 2]) &&
                               !std::isalpha(static_cast<unsigned char>(text[start - 2])) &&
                               text[start - 2] != '.' && text[start - 2] != ')');
            if (signed_ok) --start;
        }

        while (i < text.size() && is_digit(text[i])) ++i;
        if (i < text.size() && text[i] == '.') {
            ++i;
            while (i < text.size() && is_digit(text[i])) ++i;
        }
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            std::size_t exp = i + 1;
            if (exp < text.size() && (text[exp] == '+' || text[exp] == '-')) ++exp;
            if (exp < text.size() && is_digit(text[exp])) {
                i = exp;
                while (i < text.size() && is_digit(text[i])) ++i;
            }
        }
        // Plain-text fraction: "3/4".
        if (i < text.size() && text[i] == '/' && i + 1 < text.size() &&
            (is_digit(text[i + 1]) ||
             ((text[i + 1] == '-' || text[i + 1] == '+') && i + 2 < text.size() &&
              is_digit(text[i + 2])))) {
            ++i;
            if (text[i] == '-' || text[i] == '+') ++i;
            while (i < text.size() && is_digit(text[i])) ++i;
            if (i < text.size() && text[i] == '.') {
                ++i;
                while (i < text.size() && is_digit(text[i])) ++i;
            }
        }
        last = std::string(text.substr(start, i - start));
    }
    return last;
}

bool answers_match(std::string_view expected, std::string_view candidate) {
    const std::string lhs = canonicalize_answer(expected);
    const std::string rhs = canonicalize_answer(candidate);
    const auto lv = parse_numeric(lhs);
    const auto rv = parse_numeric(rhs);
    if (lv && rv) return std::fabs(*lv - *rv) <= 1e-9;
    return to_lower(lhs) == to_lower(rhs);
}

Verdict verify(const Problem& problem, std::string_view response_text) {
    Verdict verdict;

    if (auto boxed = extract_boxed(response_text)) {
        verdict.method = ExtractionMethod::BoxedExtraction;
        verdict.extracted_answer = canonicalize_answer(*boxed);
        verdict.correct = answers_match(problem.answer, *boxed);
        return verdict;
    }

    if (auto number = extract_last_number(response_text)) {
        verdict.method = ExtractionMethod::LastNumber;
        verdict.extracted_answer = canonicalize_answer(*number);
        verdict.correct = answers_match(problem.answer, *number);
        return verdict;
    }

    // No box and no number: the response itself is the only candidate.
    verdict.method = ExtractionMethod::Exact;
    const std::string whole = canonicalize_answer(response_text);
    if (!whole.empty() && answers_match(problem.answer, whole)) {
        verdict.correct = true;
        verdict.extracted_answer = whole;
    }
    return verdict;
}

const char* to_string(ExtractionMethod method) {
    switch (method) {
        case ExtractionMethod::BoxedExtraction: return "boxed-extraction";
        case ExtractionMethod::LastNumber: return "last-number";
        case ExtractionMethod::Exact: return "exact";
    }
    return "exact";
}

}  // namespace selftrain
