#pragma once

#include <string>
#include <vector>

#include "ragdef/corpus.hpp"
#include "ragdef/providers.hpp"

namespace ragdef {

struct RankedDoc {
    Document doc;
    double score = 0.0;  // cosine similarity normalized to [0, 1]
    int rank = 0;        // 1-based
};

// Cosine similarity mapped affinely to [0, 1]: (cos + 1) / 2.
// Throws on dimension mismatch or an all-zero vector.
double similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// The k highest-similarity documents for the query (all of them when
// k > |docs|), sorted by score descending, ties broken by doc id ascending.
std::vector<RankedDoc> top_k(const Query& query, const std::vector<Document>& docs, int k,
                             Embedder& embedder);
std::vector<RankedDoc> top_k(const Query& query, const Corpus& corpus, int k, Embedder& embedder);

// Same selection given precomputed scores; exposed so callers that already
// embedded the pool can rank without re-embedding.
std::vector<RankedDoc> rank_by_score(const std::vector<Document>& docs,
                                     const std::vector<double>& scores, int k);

}  // namespace ragdef
