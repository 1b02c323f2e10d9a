#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Base for every error raised by the pipeline. Validation verdicts are data,
// never exceptions; these signal that an operation could not produce a result.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class DuplicateNameError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class UnknownToolError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Assistant output did not follow the <think>...</think> payload contract.
class FormatError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class RetriesExhaustedError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class TranscriptMissError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class GoalLeakError : public Error {
public:
    using Error::Error;
};

class TypeMismatchError : public Error {
public:
    using Error::Error;
};

// A judge could not be consulted (as opposed to a judge returning "fail").
class InfrastructureError : public Error {
public:
    using Error::Error;
};

class JudgeFormatError : public Error {
public:
    using Error::Error;
};

} // namespace forge
