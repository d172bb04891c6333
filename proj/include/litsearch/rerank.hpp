#pragma once

#include "litsearch/agents.hpp"
#include "litsearch/index.hpp"
#include "litsearch/textproc.hpp"

#include <array>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace litsearch {

struct FusionParams {
    double rrf_k = 60.0;
};

struct ScoredChunk {
    std::string chunk_id;
    std::string doc_id;
    double score = 0.0;
};

struct RankedChunk {
    std::string chunk_id;
    std::string doc_id;
    double fused_score = 0.0;
    std::vector<std::optional<std::size_t>> per_query_ranks; // 1-based; absent when unranked

    bool operator==(const RankedChunk&) const = default;
};

// BM25L ordering of exactly these chunks against the query text, over an
// ephemeral chunk-granularity index (stats from this set). Zero-score chunks
// rank after every positive score; ties break by chunk_id.
std::vector<ScoredChunk> score_chunks(const std::vector<Chunk>& chunks,
                                      const std::string& query_text, const Bm25lParams& params,
                                      const std::unordered_set<std::string>& stopwords);

// Reciprocal rank fusion: fused(c) = sum over rankings containing c of
// 1/(rrf_k + rank). Items absent from a ranking contribute nothing for it.
// Sorted by fused score descending, ties by item id ascending.
std::vector<RankedChunk> rrf_fuse(const std::vector<std::vector<std::string>>& rankings,
                                  const FusionParams& params);

// Fuses the question ranking with one ranking per proposed answer (answer
// text plus its synonym expansions), truncated to top_n. Chunks scoring zero
// for a query are absent from that query's ranking.
std::vector<RankedChunk> rerank(const std::vector<Chunk>& chunks, const std::string& question,
                                const std::array<ProposedAnswer, 3>& proposed,
                                std::size_t top_n, const Bm25lParams& bm25l,
                                const FusionParams& fusion,
                                const std::unordered_set<std::string>& stopwords);

} // namespace litsearch
