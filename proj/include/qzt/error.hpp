#pragma once

#include <stdexcept>
#include <string>

namespace qzt {

// Failure categories. The CLI maps them onto exit codes:
// config -> 2, data -> 3, numeric -> 4. Resource and dimension errors are
// reported as config errors because they come from user-chosen sizes.
enum class ErrorKind { Config, Data, Numeric, Resource, Dimension };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorKind::Data, w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};
struct ResourceError : Error {
    explicit ResourceError(const std::string& w) : Error(ErrorKind::Resource, w) {}
};
struct DimensionError : Error {
    explicit DimensionError(const std::string& w) : Error(ErrorKind::Dimension, w) {}
};

inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Data: return 3;
        case ErrorKind::Numeric: return 4;
        case ErrorKind::Config:
        case ErrorKind::Resource:
        case ErrorKind::Dimension: return 2;
    }
    return 1;
}

}  // namespace qzt
