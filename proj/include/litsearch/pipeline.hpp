#pragma once

#include "litsearch/agents.hpp"
#include "litsearch/corpus.hpp"
#include "litsearch/index.hpp"
#include "litsearch/llm_gateway.hpp"
#include "litsearch/rerank.hpp"
#include "litsearch/search_terms.hpp"
#include "litsearch/textproc.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace litsearch {

struct AskConfig {
    std::size_t top_docs = 200;
    std::size_t top_chunks = 30;
    bool dedup_enabled = false;
    std::size_t dedup_set_size = 3;
    std::optional<Date> date_cutoff;
    ChunkingConfig chunking;
    Bm25lParams bm25l;
    FusionParams fusion;
    RecencyParams recency;
    BoostWeights boosts;
    std::size_t n_statements = 10; // verification statements per draft
};

// What every stage saw, in stage order. Each stage's ids derive from the
// previous stage's output.
struct StageTrace {
    SearchTermSet term_set;
    std::vector<ProposedAnswer> proposed; // empty when retrieval came up empty
    std::vector<SearchHit> search_hits;
    std::vector<RankedChunk> reranked;
    std::vector<std::string> retained_doc_ids;
    std::vector<std::string> attributed_doc_ids;

    bool operator==(const StageTrace&) const = default;
};

struct AnswerBundle {
    Answer answer;
    std::vector<ChunkSummary> retained;
    StageTrace trace;

    bool operator==(const AnswerBundle&) const = default;
};

struct CoveResult {
    AnswerBundle draft;
    std::vector<std::string> statements;
    std::vector<std::string> questions;
    std::vector<AnswerBundle> verifications; // one per question, failed ones declined
    std::string final_text;
    std::vector<std::string> reference_union; // sorted unique doc_ids
};

// Full retrieve -> rerank -> extract -> answer round. The index must be
// document-granularity over the supplied corpus. Empty retrieval yields a
// declined answer with the trace recorded up to that point.
AnswerBundle ask(const std::string& question, const InvertedIndex& doc_index,
                 const std::vector<Document>& corpus, const EntityDictionary& dict,
                 Gateway& gateway, const AskConfig& cfg,
                 const std::optional<std::vector<std::string>>& multiple_choice = std::nullopt);

// Draft, extract ~n key statements, verify each via an independent ask with
// the same config, then synthesize the final response. A failed verification
// records a declined bundle instead of aborting the run.
CoveResult cove(const std::string& question, const InvertedIndex& doc_index,
                const std::vector<Document>& corpus, const EntityDictionary& dict,
                Gateway& gateway, const AskConfig& cfg);

enum class ReferenceMode { attributed, retained };

// Union of doc ids across bundles: attributions, or retained summary docs.
std::vector<std::string> collect_references(const std::vector<AnswerBundle>& bundles,
                                            ReferenceMode mode);

// The chunks the rerank stage sees for retrieved documents: sections are
// chunked; documents without sections contribute title+abstract as one chunk.
std::vector<Chunk> chunks_for_document(const Document& doc, const ChunkingConfig& cfg);

// Line-delimited stage records (stage name, ordered ids, scores). Stable
// field names; read_trace_jsonl inverts write_trace_jsonl exactly.
std::string trace_to_jsonl(const StageTrace& trace);
StageTrace trace_from_jsonl(const std::string& text);

std::string bundle_to_json(const AnswerBundle& bundle);
std::string cove_to_json(const CoveResult& result);

struct RunConfig {
    AskConfig ask;
    ProviderConfig provider;
    std::size_t search_top_k = 200; // `search` subcommand default
};

// Key/value JSON document covering every tunable default; absent keys keep
// their defaults. Throws ParseError on unknown structure or bad values.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

} // namespace litsearch
