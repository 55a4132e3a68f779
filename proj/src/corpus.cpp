#include "ragdef/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ragdef {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(Origin o) {
    switch (o) {
        case Origin::clean: return "clean";
        case Origin::poisoned: return "poisoned";
        case Origin::verified_correct: return "verified_correct";
    }
    return "clean";
}

Origin origin_from_string(const std::string& s) {
    if (s == "clean") return Origin::clean;
    if (s == "poisoned") return Origin::poisoned;
    if (s == "verified_correct") return Origin::verified_correct;
    throw CorpusError("unknown origin value: \"" + s + "\"");
}

Corpus::Corpus(std::vector<Document> docs) {
    for (auto& d : docs) add(std::move(d));
}

void Corpus::add(Document doc) {
    if (index_.count(doc.id) > 0) {
        throw CorpusError("duplicate document id \"" + doc.id + "\"");
    }
    if (doc.origin == Origin::poisoned && doc.meta.count("target") == 0) {
        throw CorpusError("poisoned document \"" + doc.id +
                          "\" is missing meta[\"target\"] (the attacked query id)");
    }
    index_.emplace(doc.id, docs_.size());
    docs_.push_back(std::move(doc));
}

const Document* Corpus::find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    return &docs_[it->second];
}

namespace {

std::map<std::string, std::string> parse_meta(const json& j, const std::string& where) {
    std::map<std::string, std::string> meta;
    if (!j.is_object()) throw CorpusError(where + ": meta must be an object of strings");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) {
            throw CorpusError(where + ": meta value for key \"" + it.key() + "\" is not a string");
        }
        meta[it.key()] = it.value().get<std::string>();
    }
    return meta;
}

std::string require_string(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw CorpusError(where + ": missing or non-string field \"" + std::string(field) + "\"");
    }
    return j[field].get<std::string>();
}

}  // namespace

Corpus parse_corpus(const std::string& jsonl, const std::string& source_name) {
    Corpus corpus;
    std::istringstream in(jsonl);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string where = source_name + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(where + ": malformed JSON line (" + e.what() + ")");
        }
        if (!j.is_object()) throw CorpusError(where + ": line is not a JSON object");

        Document d;
        d.id = require_string(j, "id", where);
        d.text = require_string(j, "text", where);
        if (j.contains("origin")) {
            if (!j["origin"].is_string()) throw CorpusError(where + ": origin must be a string");
            try {
                d.origin = origin_from_string(j["origin"].get<std::string>());
            } catch (const CorpusError& e) {
                throw CorpusError(where + ": " + e.what());
            }
        }
        if (j.contains("meta")) d.meta = parse_meta(j["meta"], where);

        try {
            corpus.add(std::move(d));
        } catch (const CorpusError& e) {
            throw CorpusError(where + ": " + e.what());
        }
    }
    return corpus;
}

Corpus ingest_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open corpus file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str(), path);
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.docs()) {
        ordered_json j;
        j["id"] = d.id;
        j["text"] = d.text;
        j["origin"] = to_string(d.origin);
        if (!d.meta.empty()) j["meta"] = d.meta;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write corpus file: " + path);
    out << serialize_corpus(corpus);
}

ReferenceSet load_reference_set(const std::string& path) {
    Corpus raw = ingest_corpus(path);
    ReferenceSet refs;
    refs.docs.reserve(raw.size());
    for (Document d : raw.docs()) {
        d.origin = Origin::verified_correct;
        refs.docs.push_back(std::move(d));
    }
    return refs;
}

std::vector<Query> parse_queries(const std::string& jsonl, const std::string& source_name) {
    std::vector<Query> queries;
    std::unordered_map<std::string, int> seen;
    std::istringstream in(jsonl);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string where = source_name + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(where + ": malformed JSON line (" + e.what() + ")");
        }
        if (!j.is_object()) throw CorpusError(where + ": line is not a JSON object");

        Query q;
        q.id = require_string(j, "id", where);
        q.text = require_string(j, "text", where);
        q.gold_answer = require_string(j, "gold_answer", where);
        if (j.contains("attack_target")) {
            if (!j["attack_target"].is_string()) {
                throw CorpusError(where + ": attack_target must be a string");
            }
            q.attack_target = j["attack_target"].get<std::string>();
        }
        if (j.contains("meta")) q.meta = parse_meta(j["meta"], where);

        if (seen.count(q.id) > 0) {
            throw CorpusError(where + ": duplicate query id \"" + q.id + "\"");
        }
        seen.emplace(q.id, line_no);
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<Query> load_queries(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open query file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_queries(buf.str(), path);
}

std::string serialize_queries(const std::vector<Query>& queries) {
    std::string out;
    for (const auto& q : queries) {
        ordered_json j;
        j["id"] = q.id;
        j["text"] = q.text;
        j["gold_answer"] = q.gold_answer;
        if (q.attack_target) j["attack_target"] = *q.attack_target;
        if (!q.meta.empty()) j["meta"] = q.meta;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_queries(const std::vector<Query>& queries, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write query file: " + path);
    out << serialize_queries(queries);
}

}  // namespace ragdef
