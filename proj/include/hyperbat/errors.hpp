// errors.hpp - exception type shared by every hyperbat module

#pragma once

#include <stdexcept>
#include <string>

namespace hyperbat {

enum class ErrorKind {
    InvalidParams,
    InvalidTime,
    NoCharging,
    IntegrationFailure,
    TruncationInsufficient,
    UnphysicalMoments,
    ConfigInvalid,
    FileIo,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace hyperbat
