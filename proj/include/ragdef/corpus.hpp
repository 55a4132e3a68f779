#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragdef/errors.hpp"

namespace ragdef {

enum class Origin { clean, poisoned, verified_correct };

std::string to_string(Origin o);
Origin origin_from_string(const std::string& s);

// One corpus passage. `meta` is free-form string metadata; poisoned documents
// must carry meta["target"] = the id of the query they attack.
struct Document {
    std::string id;
    std::string text;
    Origin origin = Origin::clean;
    std::map<std::string, std::string> meta;

    bool operator==(const Document&) const = default;
};

struct Query {
    std::string id;
    std::string text;
    std::string gold_answer;
    std::optional<std::string> attack_target;
    std::map<std::string, std::string> meta;

    bool operator==(const Query&) const = default;
};

// Ordered document collection with unique ids. Immutable in normal use:
// attack injection and filtering build new corpora rather than mutating one.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> docs);

    // Throws CorpusError on duplicate id or a poisoned doc without meta["target"].
    void add(Document doc);

    const std::vector<Document>& docs() const { return docs_; }
    const Document* find(const std::string& id) const;
    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }

    bool operator==(const Corpus& other) const { return docs_ == other.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Small set of manually verified clean documents used as the semantic benchmark.
struct ReferenceSet {
    std::vector<Document> docs;  // all origin == verified_correct

    std::size_t size() const { return docs.size(); }
    bool empty() const { return docs.empty(); }
};

// JSONL ingestion. One JSON object per line:
//   {"id": str, "text": str, "origin": "clean"|"poisoned"|"verified_correct", "meta": {str: str}}
// Missing origin defaults to clean. Iteration order is file order.
// Errors name the offending line number (malformed) or id (duplicate).
Corpus ingest_corpus(const std::string& path);
Corpus parse_corpus(const std::string& jsonl, const std::string& source_name = "<string>");

// Serialization inverse of ingest_corpus: one document per line, stable field
// order, no BOM. parse_corpus(serialize_corpus(c)) == c.
std::string serialize_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::string& path);

// Loads a corpus file and stamps every document origin=verified_correct,
// regardless of what the file says.
ReferenceSet load_reference_set(const std::string& path);

// Query file: {"id": str, "text": str, "gold_answer": str, "attack_target"?: str, "meta"?: {..}}
std::vector<Query> load_queries(const std::string& path);
std::vector<Query> parse_queries(const std::string& jsonl, const std::string& source_name = "<string>");
std::string serialize_queries(const std::vector<Query>& queries);
void write_queries(const std::vector<Query>& queries, const std::string& path);

}  // namespace ragdef
