#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kahania {

/// Byte range [begin, end) into the source text of a parse.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, SourceSpan span)
        : std::runtime_error(std::move(message)), span_(span) {}
    SourceSpan span() const { return span_; }

private:
    SourceSpan span_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnboundSymbol : public EvalError {
public:
    explicit UnboundSymbol(const std::string& name)
        : EvalError("unbound symbol: " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class DomainError : public EvalError {
public:
    using EvalError::EvalError;
};

class UnsupportedForm : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EssentialSingularity : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonlinearConstraint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfiniteAnchor : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidAnchor : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoValidAnchor : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergentIntegral : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kahania
