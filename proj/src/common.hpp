// Error kinds shared by every module, plus a few numeric helpers.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cylperc {

enum class ErrorCode {
    InvalidArgument = 1,
    InvalidWindow,
    WindowUndercoverage,
    DegenerateDirection,
    InvalidSegment,
    LadderOverflow,
    NoPath,
    NoConnection,
    FlowNotFeasible,
    StartCovered,
    Io,
    Internal,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::InvalidArgument, what);
}

// volume of the unit n-ball
inline double kappa(int n) {
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

const char* git_describe();

} // namespace cylperc
