#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace taskmap {

// Problems caused by input data or by callers violating a documented
// contract. The CLI maps these to exit code 3; anything else is treated
// as an internal error (exit code 4).
class DataError : public std::runtime_error {
public:
    DataError(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& what) {
    throw DataError(std::move(kind), what);
}

} // namespace taskmap
