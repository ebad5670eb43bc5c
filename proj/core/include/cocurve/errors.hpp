#pragma once

#include <stdexcept>
#include <string>

namespace cocurve {

// Coarse failure category, used by the CLI to map exceptions to exit codes.
enum class ErrorKind { io = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

struct NotFoundError : Error {
    explicit NotFoundError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct SingularError : Error {
    explicit SingularError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct NotPsdError : Error {
    explicit NotPsdError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct DegenerateDataError : Error {
    explicit DegenerateDataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

}  // namespace cocurve
