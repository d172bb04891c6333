#pragma once

#include <stdexcept>
#include <string>

namespace litsearch {

// Base for everything this library throws deliberately.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Corpus / dictionary file problems (bad line, duplicate id, missing field).
class CorpusError : public Error {
public:
    using Error::Error;
};

// Structured-markup problems (term-set XML, config files, record files).
class ParseError : public Error {
public:
    using Error::Error;
};

// An agent's completion stayed unparseable after the one allowed re-prompt.
class AgentOutputError : public Error {
public:
    using Error::Error;
};

// An answer cited a document that was not among the supplied summaries.
class AttributionError : public Error {
public:
    using Error::Error;
};

// Caller handed the eval harness inconsistent data (e.g. correct without answered).
class InputError : public Error {
public:
    using Error::Error;
};

// Provider-side failures.
class GatewayError : public Error {
public:
    using Error::Error;
};

// Retryable: rate limits, timeouts, connection resets.
class TransientError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Not retryable: bad or missing credentials.
class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Provider answered with something we cannot interpret.
class ProtocolError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// The mock provider had no script entry for a prompt.
class UnmatchedPromptError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

} // namespace litsearch
