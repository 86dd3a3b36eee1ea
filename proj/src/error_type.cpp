#include "led/error_type.hpp"

#include <bit>

#include "led/errors.hpp"

namespace led {

namespace {
constexpr std::array<std::string_view, kErrorTypeCount> kNames = {
    "missing", "hallucination", "size", "split", "merge", "overlap", "duplicate", "misclassification",
};
}  // namespace

std::string_view to_string(ErrorType t) { return kNames[index_of(t)]; }

std::optional<ErrorType> parse_error_type(std::string_view s) {
    for (ErrorType t : kAllErrorTypes) {
        if (kNames[index_of(t)] == s) return t;
    }
    return std::nullopt;
}

std::size_t ErrorSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<ErrorType> ErrorSet::to_vector() const {
    std::vector<ErrorType> out;
    for (ErrorType t : kAllErrorTypes) {
        if (contains(t)) out.push_back(t);
    }
    return out;
}

std::vector<std::string> ErrorSet::names() const {
    std::vector<std::string> out;
    for (ErrorType t : to_vector()) out.emplace_back(to_string(t));
    return out;
}

std::string describe(ErrorSet s) {
    std::string out = "{";
    bool first = true;
    for (const auto& n : s.names()) {
        if (!first) out += ",";
        out += n;
        first = false;
    }
    return out + "}";
}

const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Usage: return "usage";
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Internal: return "internal";
    }
    return "internal";
}

}  // namespace led
