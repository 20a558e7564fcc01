#pragma once

#include <stdexcept>
#include <string>

namespace aif {

// Contract violations (bad shapes, out-of-range arguments) throw
// std::invalid_argument; runtime failures (non-finite values, protocol
// errors) throw std::runtime_error.
[[noreturn]] inline void fail_contract(const std::string& msg) {
    throw std::invalid_argument(msg);
}

[[noreturn]] inline void fail_runtime(const std::string& msg) {
    throw std::runtime_error(msg);
}

inline void check_arg(bool cond, const std::string& msg) {
    if (!cond) fail_contract(msg);
}

inline void check_runtime(bool cond, const std::string& msg) {
    if (!cond) fail_runtime(msg);
}

}  // namespace aif
