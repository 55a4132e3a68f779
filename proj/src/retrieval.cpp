#include "ragdef/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ragdef {

double similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw Error("similarity: dimension mismatch (" + std::to_string(u.dim()) + " vs " +
                    std::to_string(v.dim()) + ")");
    }
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
        uv += u.values[i] * v.values[i];
    }
    if (uu == 0.0 || vv == 0.0) throw Error("similarity: zero vector");
    double cosine = uv / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp((cosine + 1.0) / 2.0, 0.0, 1.0);
}

std::vector<RankedDoc> rank_by_score(const std::vector<Document>& docs,
                                     const std::vector<double>& scores, int k) {
    if (k < 1) throw Error("top_k: k must be >= 1");
    if (docs.size() != scores.size()) throw Error("rank_by_score: arity mismatch");

    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs[a].id < docs[b].id;
    };
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(), better);

    std::vector<RankedDoc> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(RankedDoc{docs[order[i]], scores[order[i]], static_cast<int>(i) + 1});
    }
    return out;
}

std::vector<RankedDoc> top_k(const Query& query, const std::vector<Document>& docs, int k,
                             Embedder& embedder) {
    if (k < 1) throw Error("top_k: k must be >= 1");
    if (docs.empty()) return {};

    auto qvec = embedder.embed({query.text});
    auto dvecs = embedder.embed_docs(docs);

    std::vector<double> scores(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) scores[i] = similarity(qvec[0], dvecs[i]);
    return rank_by_score(docs, scores, k);
}

std::vector<RankedDoc> top_k(const Query& query, const Corpus& corpus, int k, Embedder& embedder) {
    return top_k(query, corpus.docs(), k, embedder);
}

}  // namespace ragdef
