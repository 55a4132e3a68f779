#include "ragdef/providers.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace ragdef {

using nlohmann::json;

std::vector<EmbeddingVector> Embedder::embed_docs(const std::vector<Document>& docs) {
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    return embed(texts);
}

// ---------------------------------------------------------------------------
// ScriptedEmbedder
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// splitmix64; avoids std:: distributions so results are platform-stable.
struct SplitMix {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() {  // (0, 1)
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void normalize(std::vector<double>& a) {
    double n = norm(a);
    if (n > 0.0) {
        for (auto& x : a) x /= n;
    }
}

std::vector<double> seeded_unit_vector(std::uint64_t key, std::size_t dim) {
    SplitMix rng{key};
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.gaussian();
    normalize(v);
    return v;
}

// Tokens are lowercased ASCII alnum runs; bytes >= 0x80 count as letters so
// UTF-8 words stay intact.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        bool wordish = std::isalnum(c) || c >= 0x80;
        if (wordish) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

ScriptedEmbedder::ScriptedEmbedder(std::uint64_t seed, std::size_t dim, double group_epsilon)
    : seed_(seed), dim_(dim), group_epsilon_(group_epsilon) {
    if (dim_ == 0) throw ConfigError("embedding dim must be positive");
    if (group_epsilon_ <= 0.0 || group_epsilon_ >= 1.0) {
        throw ConfigError("group epsilon must lie in (0, 1)");
    }
}

EmbeddingVector ScriptedEmbedder::content_vector(const std::string& text) const {
    auto tokens = tokenize(text);
    std::vector<double> acc(dim_, 0.0);
    if (tokens.empty()) {
        acc = seeded_unit_vector(fnv1a(text) ^ seed_, dim_);
        return EmbeddingVector{std::move(acc)};
    }
    for (const auto& tok : tokens) {
        auto tv = seeded_unit_vector(fnv1a(tok) ^ (seed_ * 0x9e3779b97f4a7c15ull + 1), dim_);
        for (std::size_t i = 0; i < dim_; ++i) acc[i] += tv[i];
    }
    normalize(acc);
    if (norm(acc) == 0.0) acc = seeded_unit_vector(fnv1a(text) ^ seed_, dim_);
    return EmbeddingVector{std::move(acc)};
}

EmbeddingVector ScriptedEmbedder::grouped_vector(const Document& doc) const {
    auto tag_it = doc.meta.find("group");
    if (tag_it == doc.meta.end()) return content_vector(doc.text);

    const std::string& tag = tag_it->second;
    auto anchor_it = doc.meta.find("anchor");
    const std::string& anchor_text = anchor_it != doc.meta.end() ? anchor_it->second : tag;

    auto anchor = content_vector(anchor_text).values;
    auto p = content_vector(doc.text).values;

    // Place the member strictly inside epsilon/4 of the anchor so any two
    // members stay within the configured cosine distance of each other, not
    // just of the anchor.
    SplitMix rng{fnv1a(doc.text) ^ fnv1a(tag) ^ (seed_ + 0x51ul)};
    double delta = group_epsilon_ / 4.0 * rng.uniform();
    double cos_a = 1.0 - delta;
    double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));

    double proj = dot(p, anchor);
    std::vector<double> perp(dim_);
    for (std::size_t i = 0; i < dim_; ++i) perp[i] = p[i] - proj * anchor[i];
    if (norm(perp) < 1e-9) {
        auto alt = seeded_unit_vector(fnv1a(doc.text) ^ fnv1a(tag) ^ (seed_ + 0x52ul), dim_);
        double ap = dot(alt, anchor);
        for (std::size_t i = 0; i < dim_; ++i) perp[i] = alt[i] - ap * anchor[i];
    }
    normalize(perp);

    std::vector<double> v(dim_);
    for (std::size_t i = 0; i < dim_; ++i) v[i] = cos_a * anchor[i] + sin_a * perp[i];
    normalize(v);
    return EmbeddingVector{std::move(v)};
}

std::vector<EmbeddingVector> ScriptedEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (t.empty()) throw ProviderError(ProviderError::Kind::other, "cannot embed an empty string");
        out.push_back(content_vector(t));
    }
    return out;
}

std::vector<EmbeddingVector> ScriptedEmbedder::embed_docs(const std::vector<Document>& docs) {
    std::vector<EmbeddingVector> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        if (d.text.empty()) {
            throw ProviderError(ProviderError::Kind::other,
                                "cannot embed empty document \"" + d.id + "\"");
        }
        out.push_back(grouped_vector(d));
    }
    return out;
}

// ---------------------------------------------------------------------------
// ScriptedChat
// ---------------------------------------------------------------------------

ScriptedChat::ScriptedChat(std::vector<ScriptedRule> rules) {
    std::size_t n_default = 0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        CompiledRule cr;
        cr.rule = std::move(rules[i]);
        cr.order = i;
        if (cr.rule.is_default) {
            ++n_default;
            default_index_ = rules_.size();
        } else if (cr.rule.is_regex) {
            if (cr.rule.match.size() != 1) {
                throw ConfigError("regex rule must have exactly one pattern");
            }
            try {
                cr.re.emplace(cr.rule.match[0], std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw ConfigError("bad regex in scripted rule: " + std::string(e.what()));
            }
        } else if (cr.rule.match.empty()) {
            throw ConfigError("non-default scripted rule needs at least one match substring");
        }
        rules_.push_back(std::move(cr));
    }
    if (n_default != 1) {
        throw ConfigError("scripted ruleset must contain exactly one default rule (found " +
                          std::to_string(n_default) + ")");
    }
}

std::string ScriptedChat::chat(const ChatRequest& req) {
    if (req.system_prompt.empty() || req.user_prompt.empty()) {
        throw ProviderError(ProviderError::Kind::other, "chat prompts must be non-empty");
    }
    {
        std::lock_guard<std::mutex> lock(mu_);
        history_.push_back(req);
    }

    const CompiledRule* best = nullptr;
    for (const auto& cr : rules_) {
        if (cr.rule.is_default) continue;
        bool matches;
        if (cr.re) {
            matches = std::regex_search(req.user_prompt, *cr.re);
        } else {
            matches = std::all_of(cr.rule.match.begin(), cr.rule.match.end(),
                                  [&](const std::string& sub) {
                                      return req.user_prompt.find(sub) != std::string::npos;
                                  });
        }
        if (!matches) continue;
        if (best == nullptr || cr.rule.priority > best->rule.priority ||
            (cr.rule.priority == best->rule.priority && cr.order < best->order)) {
            best = &cr;
        }
    }
    if (best == nullptr) best = &rules_[default_index_];
    return best->rule.response;
}

std::vector<ChatRequest> ScriptedChat::history() const {
    std::lock_guard<std::mutex> lock(mu_);
    return history_;
}

void ScriptedChat::clear_history() {
    std::lock_guard<std::mutex> lock(mu_);
    history_.clear();
}

std::vector<ScriptedRule> parse_ruleset(const std::string& json_text,
                                        const std::string& source_name) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(source_name + ": malformed ruleset JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
        throw ConfigError(source_name + ": ruleset must be {\"rules\": [...]}");
    }

    std::vector<ScriptedRule> rules;
    for (const auto& rj : j["rules"]) {
        if (!rj.is_object()) throw ConfigError(source_name + ": rule entries must be objects");
        ScriptedRule r;
        if (!rj.contains("response") || !rj["response"].is_string()) {
            throw ConfigError(source_name + ": rule is missing a string \"response\"");
        }
        r.response = rj["response"].get<std::string>();
        r.is_default = rj.value("default", false);
        r.is_regex = rj.value("regex", false);
        r.priority = rj.value("priority", 0);
        if (rj.contains("match")) {
            if (rj["match"].is_string()) {
                r.match.push_back(rj["match"].get<std::string>());
            } else if (rj["match"].is_array()) {
                for (const auto& m : rj["match"]) {
                    if (!m.is_string()) {
                        throw ConfigError(source_name + ": match entries must be strings");
                    }
                    r.match.push_back(m.get<std::string>());
                }
            } else {
                throw ConfigError(source_name + ": match must be a string or array of strings");
            }
        }
        if (!r.is_default && r.match.empty()) {
            throw ConfigError(source_name + ": non-default rule needs a match pattern");
        }
        rules.push_back(std::move(r));
    }
    // Construction enforces the exactly-one-default invariant.
    ScriptedChat probe(rules);
    return rules;
}

std::vector<ScriptedRule> load_ruleset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open ruleset file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ruleset(buf.str(), path);
}

// ---------------------------------------------------------------------------
// HTTP providers
// ---------------------------------------------------------------------------

namespace {

// Bounds concurrent requests without assuming a C++20 semaphore max.
class InFlightGate {
public:
    explicit InFlightGate(int cap) : cap_(cap > 0 ? cap : 1) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return active_ < cap_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    int cap_;
    int active_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

struct GateGuard {
    InFlightGate& gate;
    explicit GateGuard(InFlightGate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

struct HttpCore {
    HttpProviderConfig config;
    httplib::Client client;
    InFlightGate gate;

    explicit HttpCore(HttpProviderConfig cfg)
        : config(std::move(cfg)), client(config.base_url), gate(config.max_in_flight) {
        client.set_connection_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
        client.set_write_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    }

    httplib::Headers headers() const {
        httplib::Headers h;
        if (!config.api_key_env.empty()) {
            const char* key = std::getenv(config.api_key_env.c_str());
            if (key != nullptr && *key != '\0') {
                h.emplace("Authorization", std::string("Bearer ") + key);
            }
        }
        return h;
    }

    json post_json(const std::string& path, const json& body) {
        GateGuard guard(gate);
        std::string payload = body.dump();
        int attempts = config.retries + 1;
        httplib::Result res;
        for (int i = 0; i < attempts; ++i) {
            res = client.Post(path, headers(), payload, "application/json");
            if (res) break;
        }
        if (!res) {
            auto err = res.error();
            auto kind = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                         err == httplib::Error::Write)
                            ? ProviderError::Kind::timeout
                            : ProviderError::Kind::transport;
            throw ProviderError(kind, "HTTP request to " + config.base_url + path +
                                          " failed: " + httplib::to_string(err));
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError(ProviderError::Kind::http_status,
                                "HTTP " + std::to_string(res->status) + " from " +
                                    config.base_url + path);
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(ProviderError::Kind::malformed_response,
                                "malformed response body from " + config.base_url + path + ": " +
                                    e.what());
        }
    }
};

}  // namespace

struct HttpChatProvider::Impl : HttpCore {
    using HttpCore::HttpCore;
};

HttpChatProvider::HttpChatProvider(HttpProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpChatProvider::~HttpChatProvider() = default;

std::string HttpChatProvider::chat(const ChatRequest& req) {
    if (req.system_prompt.empty() || req.user_prompt.empty()) {
        throw ProviderError(ProviderError::Kind::other, "chat prompts must be non-empty");
    }
    json body = {
        {"model", impl_->config.model},
        {"messages",
         {{{"role", "system"}, {"content", req.system_prompt}},
          {{"role", "user"}, {"content", req.user_prompt}}}},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    json reply = impl_->post_json(impl_->config.chat_path, body);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError(ProviderError::Kind::malformed_response,
                            "chat response lacks choices[0].message.content");
    }
}

struct HttpEmbedder::Impl : HttpCore {
    using HttpCore::HttpCore;
};

HttpEmbedder::HttpEmbedder(HttpProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<EmbeddingVector> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    for (const auto& t : texts) {
        if (t.empty()) throw ProviderError(ProviderError::Kind::other, "cannot embed an empty string");
    }
    if (texts.empty()) return {};

    json body = {{"model", impl_->config.model}, {"input", texts}};
    json reply = impl_->post_json(impl_->config.embeddings_path, body);

    std::vector<EmbeddingVector> out;
    try {
        const auto& data = reply.at("data");
        if (data.size() != texts.size()) {
            throw ProviderError(ProviderError::Kind::malformed_response,
                                "embedding response arity mismatch");
        }
        out.reserve(data.size());
        for (const auto& item : data) {
            EmbeddingVector v;
            for (const auto& x : item.at("embedding")) v.values.push_back(x.get<double>());
            out.push_back(std::move(v));
        }
    } catch (const json::exception&) {
        throw ProviderError(ProviderError::Kind::malformed_response,
                            "embedding response lacks data[i].embedding");
    }

    std::size_t dim = out.empty() ? 0 : out[0].dim();
    for (const auto& v : out) {
        if (v.dim() == 0 || v.dim() != dim) {
            throw ProviderError(ProviderError::Kind::malformed_response,
                                "embedding vectors disagree on dimension");
        }
        for (double x : v.values) {
            if (!std::isfinite(x)) {
                throw ProviderError(ProviderError::Kind::malformed_response,
                                    "embedding contains a non-finite component");
            }
        }
    }
    return out;
}

}  // namespace ragdef
