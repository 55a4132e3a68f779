#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "ragdef/corpus.hpp"
#include "ragdef/errors.hpp"

namespace ragdef {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
};

// Text embedding capability. embed() maps texts to fixed-dim vectors, one per
// input, same order. embed_docs() is the document-aware entry point: providers
// that understand grouping hints in doc.meta may use them; the default ignores
// them and embeds doc.text.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    virtual std::vector<EmbeddingVector> embed_docs(const std::vector<Document>& docs);
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    virtual std::string chat(const ChatRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Scripted (deterministic, offline) providers
// ---------------------------------------------------------------------------

// Deterministic embedder: each text maps to the normalized sum of seeded
// pseudorandom unit vectors, one per token, so texts sharing words land near
// each other. Documents whose meta carries a "group" tag are additionally
// pulled within cosine distance epsilon/4 of the group anchor; the anchor is
// the embedding of meta["anchor"] when present, else of the tag itself. This
// lets fixtures plant tight clusters and retrieval-winning passages without a
// real model.
class ScriptedEmbedder final : public Embedder {
public:
    explicit ScriptedEmbedder(std::uint64_t seed = 0, std::size_t dim = 64,
                              double group_epsilon = 0.02);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::vector<EmbeddingVector> embed_docs(const std::vector<Document>& docs) override;

    std::size_t dim() const { return dim_; }

private:
    EmbeddingVector content_vector(const std::string& text) const;
    EmbeddingVector grouped_vector(const Document& doc) const;

    std::uint64_t seed_;
    std::size_t dim_;
    double group_epsilon_;
};

// One entry of a scripted chat ruleset. `match` holds substrings that must all
// appear in the user prompt (single-substring is the common case), or a regex
// when is_regex is set. Exactly one default rule (fires when nothing else
// matches) must exist in a ruleset.
struct ScriptedRule {
    std::vector<std::string> match;
    std::string response;
    int priority = 0;
    bool is_regex = false;
    bool is_default = false;
};

// Deterministic chat provider backed by a rule table. The highest-priority
// matching rule answers; ties resolve to the earliest-defined rule. Records
// every request so tests can inspect the prompts that were actually sent.
class ScriptedChat final : public ChatProvider {
public:
    explicit ScriptedChat(std::vector<ScriptedRule> rules);

    std::string chat(const ChatRequest& req) override;

    std::vector<ChatRequest> history() const;
    void clear_history();

private:
    struct CompiledRule {
        ScriptedRule rule;
        std::optional<std::regex> re;
        std::size_t order = 0;
    };

    std::vector<CompiledRule> rules_;
    std::size_t default_index_ = 0;
    mutable std::mutex mu_;
    std::vector<ChatRequest> history_;
};

// Loads a scripted ruleset from a JSON file:
//   {"rules": [{"match": "substr" | ["a","b"], "regex"?: bool,
//               "response": str, "priority"?: int, "default"?: bool}, ...]}
// A missing default rule is a ConfigError at load time, not call time.
std::vector<ScriptedRule> load_ruleset(const std::string& path);
std::vector<ScriptedRule> parse_ruleset(const std::string& json_text,
                                        const std::string& source_name = "<string>");

// ---------------------------------------------------------------------------
// Networked providers (JSON-over-HTTP, configurable base URL)
// ---------------------------------------------------------------------------

struct HttpProviderConfig {
    std::string base_url;              // e.g. "http://localhost:8080"
    std::string model;
    std::string api_key_env;           // name of the env var holding the key; may be empty
    std::string chat_path = "/v1/chat/completions";
    std::string embeddings_path = "/v1/embeddings";
    int timeout_ms = 30000;
    int retries = 0;                   // extra attempts after a transport failure
    int max_in_flight = 4;
};

// POSTs {model, messages:[{role, content}], temperature, max_tokens} and reads
// choices[0].message.content. Transport errors, non-2xx statuses, and
// malformed bodies surface as distinct ProviderError kinds. Concurrent calls
// are capped at max_in_flight.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig config);
    ~HttpChatProvider() override;

    std::string chat(const ChatRequest& req) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// POSTs {model, input:[texts]} and reads data[i].embedding. Validates that all
// vectors are finite and share one dimension.
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpProviderConfig config);
    ~HttpEmbedder() override;

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// The two capabilities the pipeline needs, bundled for passing around.
struct Providers {
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<ChatProvider> chat;
};

}  // namespace ragdef
