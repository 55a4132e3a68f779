#pragma once

#include <stdexcept>
#include <string>

namespace ragdef {

// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or missing configuration (config file, ruleset file, thresholds, paths).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Corpus / query / reference-set ingestion problems (malformed line, duplicate id).
class CorpusError : public Error {
public:
    explicit CorpusError(const std::string& msg) : Error(msg) {}
};

// Anything that went wrong talking to a provider.
class ProviderError : public Error {
public:
    enum class Kind { transport, timeout, http_status, malformed_response, other };

    ProviderError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// A provider replied but the reply could not be parsed into the expected
// structure, even after the one allowed reprompt. Carries the raw reply.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::string raw_reply)
        : Error(msg), raw_reply_(std::move(raw_reply)) {}

    explicit FormatError(const std::string& msg) : Error(msg) {}

    const std::string& raw_reply() const { return raw_reply_; }

private:
    std::string raw_reply_;
};

}  // namespace ragdef
