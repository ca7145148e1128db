#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ctg {

// Error category; the CLI maps input -> exit 2, runtime -> exit 3.
enum class ErrorKind { input, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_input(std::string message) {
    throw Error(ErrorKind::input, std::move(message));
}

[[noreturn]] inline void throw_runtime(std::string message) {
    throw Error(ErrorKind::runtime, std::move(message));
}

}  // namespace ctg
