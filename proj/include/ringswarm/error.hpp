#pragma once

#include <stdexcept>
#include <string>

namespace ringswarm {

enum class ErrorCode {
    invalid_argument = 1,
    grid_mismatch,
    density_floor,
    cfl_violation,
    non_finite,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ringswarm
