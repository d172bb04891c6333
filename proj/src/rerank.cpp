#include "litsearch/rerank.hpp"

#include "litsearch/errors.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace litsearch {

std::vector<ScoredChunk> score_chunks(const std::vector<Chunk>& chunks,
                                      const std::string& query_text, const Bm25lParams& params,
                                      const std::unordered_set<std::string>& stopwords) {
    std::vector<IndexUnit> units;
    units.reserve(chunks.size());
    for (const auto& c : chunks) units.push_back(to_index_unit(c));
    InvertedIndex index = InvertedIndex::build(units, Granularity::chunk, stopwords);

    auto query_stems = tokenize_stems(query_text, stopwords);
    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        double score = index.bm25l_score_ordinal(query_stems, static_cast<std::uint32_t>(i),
                                                 params);
        scored.push_back({chunks[i].chunk_id, chunks[i].doc_id, score});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    return scored;
}

std::vector<RankedChunk> rrf_fuse(const std::vector<std::vector<std::string>>& rankings,
                                  const FusionParams& params) {
    struct Entry {
        double fused = 0.0;
        std::vector<std::optional<std::size_t>> ranks;
        std::string doc_id;
    };
    std::map<std::string, Entry> entries; // keyed by item id

    for (std::size_t q = 0; q < rankings.size(); ++q) {
        for (std::size_t r = 0; r < rankings[q].size(); ++r) {
            auto& entry = entries[rankings[q][r]];
            if (entry.ranks.empty()) entry.ranks.resize(rankings.size());
            entry.ranks[q] = r + 1;
            entry.fused += 1.0 / (params.rrf_k + static_cast<double>(r + 1));
        }
    }

    std::vector<RankedChunk> out;
    out.reserve(entries.size());
    for (auto& [id, entry] : entries) {
        RankedChunk rc;
        rc.chunk_id = id;
        rc.fused_score = entry.fused;
        rc.per_query_ranks = std::move(entry.ranks);
        out.push_back(std::move(rc));
    }
    std::sort(out.begin(), out.end(), [](const RankedChunk& a, const RankedChunk& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.chunk_id < b.chunk_id;
    });
    return out;
}

std::vector<RankedChunk> rerank(const std::vector<Chunk>& chunks, const std::string& question,
                                const std::array<ProposedAnswer, 3>& proposed,
                                std::size_t top_n, const Bm25lParams& bm25l,
                                const FusionParams& fusion,
                                const std::unordered_set<std::string>& stopwords) {
    if (chunks.empty()) return {};

    std::vector<std::string> queries;
    queries.push_back(question);
    for (const auto& answer : proposed) queries.push_back(answer.query_text());

    std::vector<std::vector<std::string>> rankings;
    rankings.reserve(queries.size());
    for (const auto& query : queries) {
        auto scored = score_chunks(chunks, query, bm25l, stopwords);
        std::vector<std::string> ranking;
        for (const auto& s : scored) {
            if (s.score <= 0.0) break; // zero scores sort last; absent from this ranking
            ranking.push_back(s.chunk_id);
        }
        rankings.push_back(std::move(ranking));
    }

    auto fused = rrf_fuse(rankings, fusion);

    std::unordered_map<std::string, const Chunk*> by_id;
    for (const auto& c : chunks) by_id.emplace(c.chunk_id, &c);
    for (auto& rc : fused) {
        rc.doc_id = by_id.at(rc.chunk_id)->doc_id;
    }
    if (fused.size() > top_n) fused.resize(top_n);
    return fused;
}

} // namespace litsearch
