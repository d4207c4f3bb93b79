#pragma once

#include <stdexcept>
#include <string>

namespace mlas {

enum class ErrorKind {
    Config,
    Io,
    Parse,
    Schema,
    Reference,
    Value,
    Shape,
    Encoding,
    Validation,
    Divergence,
};

/// Base for every library error. The kind maps onto the CLI exit-code
/// taxonomy (config=1, io=2, divergence=3).
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error(ErrorKind::Parse, m) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& m) : Error(ErrorKind::Schema, m) {}
};
struct ReferenceError : Error {
    explicit ReferenceError(const std::string& m) : Error(ErrorKind::Reference, m) {}
};
struct ValueError : Error {
    explicit ValueError(const std::string& m) : Error(ErrorKind::Value, m) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& m) : Error(ErrorKind::Shape, m) {}
};
struct EncodingError : Error {
    explicit EncodingError(const std::string& m) : Error(ErrorKind::Encoding, m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorKind::Validation, m) {}
};
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& m) : Error(ErrorKind::Divergence, m) {}
};

} // namespace mlas
