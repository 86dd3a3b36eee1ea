#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace led {

/// The eight structural layout error types. The enumeration order is the
/// position of each type in the length-8 document-level label vector.
enum class ErrorType : std::uint8_t {
    Missing = 0,
    Hallucination,
    SizeError,
    Split,
    Merge,
    Overlap,
    Duplicate,
    Misclassification,
};

inline constexpr std::size_t kErrorTypeCount = 8;

inline constexpr std::array<ErrorType, kErrorTypeCount> kAllErrorTypes = {
    ErrorType::Missing, ErrorType::Hallucination, ErrorType::SizeError, ErrorType::Split,
    ErrorType::Merge,   ErrorType::Overlap,       ErrorType::Duplicate, ErrorType::Misclassification,
};

/// Lower-case wire identifier ("missing", "size", ...).
std::string_view to_string(ErrorType t);
std::optional<ErrorType> parse_error_type(std::string_view s);

/// Everything but Misclassification; at most one per target object.
constexpr bool is_structural(ErrorType t) { return t != ErrorType::Misclassification; }

constexpr std::size_t index_of(ErrorType t) { return static_cast<std::size_t>(t); }

/// Small value set of error types, iterated in enumeration order.
class ErrorSet {
public:
    ErrorSet() = default;
    ErrorSet(std::initializer_list<ErrorType> types) {
        for (ErrorType t : types) insert(t);
    }

    void insert(ErrorType t) { bits_ |= bit(t); }
    void erase(ErrorType t) { bits_ &= static_cast<std::uint8_t>(~bit(t)); }
    bool contains(ErrorType t) const { return (bits_ & bit(t)) != 0; }
    bool empty() const { return bits_ == 0; }
    std::size_t size() const;

    ErrorSet& operator|=(ErrorSet o) {
        bits_ |= o.bits_;
        return *this;
    }
    friend ErrorSet operator|(ErrorSet a, ErrorSet b) { return a |= b; }
    friend ErrorSet operator&(ErrorSet a, ErrorSet b) {
        ErrorSet r;
        r.bits_ = a.bits_ & b.bits_;
        return r;
    }
    friend bool operator==(ErrorSet, ErrorSet) = default;

    std::uint8_t bits() const { return bits_; }
    std::vector<ErrorType> to_vector() const;
    /// Wire names in enumeration order.
    std::vector<std::string> names() const;

    /// Structural members only.
    ErrorSet structural() const {
        ErrorSet r = *this;
        r.erase(ErrorType::Misclassification);
        return r;
    }

private:
    static constexpr std::uint8_t bit(ErrorType t) { return static_cast<std::uint8_t>(1u << index_of(t)); }
    std::uint8_t bits_ = 0;
};

std::string describe(ErrorSet s);

}  // namespace led
