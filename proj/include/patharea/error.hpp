#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patharea {

/// Failure categories. The CLI maps `validation` to exit code 2 and
/// `resource` to exit code 3; `internal` signals a bug.
enum class ErrorCategory { validation, resource, numeric, internal };

/// Library-wide exception. `code()` is module-qualified, e.g.
/// "steps.NoNegativeStep" or "enumerate.OutOfMemoryBudget".
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), category_(category), code_(std::move(code)) {}

    ErrorCategory category() const noexcept { return category_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorCategory category_;
    std::string code_;
};

[[noreturn]] inline void fail(ErrorCategory category, std::string code, const std::string& what) {
    throw Error(category, std::move(code), what);
}

}  // namespace patharea
