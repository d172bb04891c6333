#pragma once

#include "litsearch/corpus.hpp"
#include "litsearch/llm_gateway.hpp"
#include "litsearch/search_terms.hpp"
#include "litsearch/textproc.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace litsearch {

// A plausible long-form answer used purely to seed retrieval vocabulary.
struct ProposedAnswer {
    std::string text;
    // key term -> synonym/abbreviation list parsed from the answer body
    std::vector<std::pair<std::string, std::vector<std::string>>> synonym_expansions;

    // Answer text with every synonym appended, the form fed to the reranker.
    std::string query_text() const;

    bool operator==(const ProposedAnswer&) const = default;
};

enum class Verdict { retained, rejected };

struct ChunkSummary {
    std::string chunk_id;
    std::string doc_id;
    std::string facts; // empty for rejected summaries
    Verdict verdict = Verdict::rejected;

    bool operator==(const ChunkSummary&) const = default;
};

struct Answer {
    std::string text;
    std::vector<std::string> attribution; // doc_ids, non-empty unless declined
    bool declined = false;

    bool operator==(const Answer&) const = default;
};

// First occurrence of <tag>...</tag> in free text; agents are prompted to
// reason first and emit their structured output inside such a block.
std::optional<std::string> extract_tag_block(const std::string& text, const std::string& tag);
std::vector<std::string> extract_all_tag_blocks(const std::string& text, const std::string& tag);

// Gene/disease mentions in the question, in order of appearance.
std::vector<EntityMention> ner_agent(const std::string& question, const EntityDictionary& dict);

// Asks for must/should term markup, parses it and injects any entity
// identifier the NER step found that the model left out. One re-prompt on a
// parse failure, then AgentOutputError.
SearchTermSet search_terms_agent(const std::string& question,
                                 const std::vector<EntityMention>& mentions, Gateway& gateway);

// Three diverse proposed answers with parsed synonym expansions. The answers
// may contradict each other; they seed retrieval, not truth.
std::array<ProposedAnswer, 3> proposed_answers_agent(const std::string& question,
                                                     Gateway& gateway);

// Parses "(synonyms/abbreviations: a, b)" and the square-bracket variant.
std::vector<std::pair<std::string, std::vector<std::string>>> parse_synonym_expansions(
    const std::string& answer_text);

// Key facts related to the question, or a rejected verdict.
ChunkSummary summarize_agent(const std::string& question, const Chunk& chunk, Gateway& gateway);

// Windows of set_size consecutive summaries; within each window the model
// drops members adding no new information. Never reorders, never resurrects
// a rejected summary; a trailing singleton window passes through unasked.
std::vector<ChunkSummary> dedup_agent(const std::string& question,
                                      const std::vector<ChunkSummary>& summaries,
                                      std::size_t set_size, Gateway& gateway);

// Final answer with attribution restricted to the supplied summaries; may
// decline. An empty summary list declines without a model call. Citing an
// unknown doc_id raises AttributionError.
Answer answer_agent(const std::string& question, const std::vector<ChunkSummary>& summaries,
                    Gateway& gateway,
                    const std::optional<std::vector<std::string>>& multiple_choice = std::nullopt);

// Key factual statements from a draft answer, at most roughly target_count.
std::vector<std::string> plan_statements_agent(const std::string& draft_answer,
                                               std::size_t target_count, Gateway& gateway);

// One call converting statements to standalone verification questions,
// paired by line; extra lines on either side are dropped.
std::vector<std::string> statements_to_questions_agent(const std::vector<std::string>& statements,
                                                       Gateway& gateway);

// Final verified response synthesized from the draft and the per-question
// verification answers.
std::string synthesize_final_agent(
    const std::string& question, const std::string& draft_answer,
    const std::vector<std::pair<std::string, std::string>>& verifications, Gateway& gateway);

} // namespace litsearch
