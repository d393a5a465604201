#pragma once

#include <stdexcept>
#include <string>

namespace cola {

// Base of every error raised by the toolkit. Subclasses name the failure
// category so callers (and the CLI) can report it without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char * kind() const noexcept { return "error"; }
};

#define COLA_DEFINE_ERROR(Name, tag)                                  \
    class Name : public Error {                                       \
    public:                                                           \
        using Error::Error;                                           \
        const char * kind() const noexcept override { return tag; }   \
    };

COLA_DEFINE_ERROR(ParseError, "parse")
COLA_DEFINE_ERROR(ValidationError, "validation")
COLA_DEFINE_ERROR(FormatError, "format")
COLA_DEFINE_ERROR(ShapeError, "shape")
COLA_DEFINE_ERROR(ArgumentError, "argument")
COLA_DEFINE_ERROR(OutOfRangeError, "out-of-range")
COLA_DEFINE_ERROR(InsufficientDataError, "insufficient-data")
COLA_DEFINE_ERROR(NumericalError, "numerical")
COLA_DEFINE_ERROR(LookupError, "lookup")
COLA_DEFINE_ERROR(DegenerateEmbeddingError, "degenerate-embedding")
COLA_DEFINE_ERROR(IoError, "io")

#undef COLA_DEFINE_ERROR

// Raised by the pipeline: wraps the failing stage's error with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string & cause)
        : Error("[" + stage + "] " + cause), stage_(std::move(stage)) {}
    const std::string & stage() const noexcept { return stage_; }
    const char * kind() const noexcept override { return "stage"; }

private:
    std::string stage_;
};

} // namespace cola
