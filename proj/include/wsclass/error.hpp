#pragma once

#include <stdexcept>
#include <string>

namespace wsclass {

// Error taxonomy mirrors the CLI exit codes: config -> 1, stage -> 2, eval -> 3.
enum class ErrorKind { Config, Data, Stage, Evaluation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Config: return 1;
            case ErrorKind::Data: return 2;
            case ErrorKind::Stage: return 2;
            case ErrorKind::Evaluation: return 3;
        }
        return 2;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_stage(const std::string& msg) { throw Error(ErrorKind::Stage, msg); }
[[noreturn]] inline void throw_eval(const std::string& msg) { throw Error(ErrorKind::Evaluation, msg); }

}  // namespace wsclass
