#ifndef EMBLENS_ERROR_HPP
#define EMBLENS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace emblens {

enum class ErrorCode {
    io = 1,       // file missing, unreadable, unwritable
    format = 2,   // malformed file contents
    invalid = 3,  // bad arguments or violated preconditions
    eval = 4,     // failure while evaluating a run
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace emblens

#endif
