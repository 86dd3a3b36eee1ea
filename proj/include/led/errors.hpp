#pragma once

#include <stdexcept>
#include <string>

namespace led {

/// Failure categories surfaced by the CLI as exit codes.
enum class ErrorCategory { Usage = 2, Validation = 3, Io = 4, Internal = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& what) : Error(ErrorCategory::Internal, what) {}
};

const char* category_name(ErrorCategory c);

}  // namespace led
