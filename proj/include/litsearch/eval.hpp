#pragma once

#include "litsearch/pipeline.hpp"

#include <optional>
#include <string>
#include <vector>

namespace litsearch {

struct BenchmarkRecord {
    std::string question;
    std::optional<std::string> gold_doc_id;
    std::optional<std::string> key_passage;
    std::vector<std::string> options; // multiple-choice, may be empty
    std::optional<std::string> correct_option;
};

struct ReviewRecord {
    std::string review_id;
    std::string derived_question;
    Date cutoff_date;
    std::vector<std::string> primary_refs;
    std::vector<std::string> secondary_refs;
};

// Line-delimited JSON records. Throws on a record carrying neither a
// gold_doc_id nor a correct_option.
std::vector<BenchmarkRecord> load_benchmark_records(const std::string& path);
std::vector<ReviewRecord> load_review_records(const std::string& path);

struct CdfRow {
    std::size_t rank = 0;
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
};

// Cumulative probability that the gold document appears at or before each
// rank in the search stage, averaged over repeats with a 95% normal-
// approximation interval. Traces are repeat-major: repeats blocks of equal
// length, parallel to `gold` within each block. Questions without a gold id
// are excluded; gold documents never found contribute zero mass everywhere.
std::vector<CdfRow> source_rank_cdf(const std::vector<StageTrace>& traces,
                                    const std::vector<std::optional<std::string>>& gold,
                                    std::size_t max_rank, std::size_t repeats);

struct StageRecallRow {
    std::string stage;
    double recall = 0.0;
    double low = 0.0;
    double high = 0.0;
};

// Fraction of gold-bearing questions whose gold document survives each
// pipeline stage; non-increasing down the funnel.
std::vector<StageRecallRow> stage_recall(const std::vector<StageTrace>& traces,
                                         const std::vector<std::optional<std::string>>& gold,
                                         std::size_t repeats);

struct QaMetrics {
    double accuracy = 0.0;
    double coverage = 0.0;
    std::optional<double> precision; // absent when nothing was attempted
    std::size_t correct = 0;
    std::size_t attempted = 0;
    std::size_t total = 0;
};

struct QaOutcome {
    bool answered = false;
    bool correct = false;
};

// accuracy = correct/total, coverage = attempted/total,
// precision = correct/attempted. Throws InputError on correct-but-unanswered.
QaMetrics qa_metrics(const std::vector<QaOutcome>& results);

struct ReferenceRecall {
    std::optional<double> initial;                // draft refs vs primary
    std::optional<double> cove;                   // reference union vs primary
    std::optional<double> initial_with_secondary; // draft refs vs primary+secondary
    std::optional<double> cove_with_secondary;    // union vs primary+secondary
};

ReferenceRecall reference_recall(const CoveResult& result, const ReviewRecord& review);

// Comma-delimited tables with pinned headers.
std::string cdf_table_csv(const std::vector<CdfRow>& rows);
std::string stage_recall_csv(const std::vector<StageRecallRow>& rows);
std::string qa_metrics_csv(const QaMetrics& metrics, std::size_t gold_available,
                           std::size_t gold_total);
std::string review_recall_csv(
    const std::vector<std::pair<std::string, ReferenceRecall>>& rows);

struct BenchmarkRun {
    std::vector<StageTrace> traces;              // repeat-major
    std::vector<std::optional<std::string>> gold; // one per question
    std::vector<QaOutcome> outcomes;              // repeat-major
    std::size_t repeats = 1;
    std::size_t gold_available = 0;
    std::size_t gold_total = 0;
};

// Runs ask() over every record, `repeats` times. A question failing with a
// pipeline error counts as unattempted with an empty trace tail.
BenchmarkRun run_qa_benchmark(const std::vector<BenchmarkRecord>& records,
                              const InvertedIndex& doc_index,
                              const std::vector<Document>& corpus,
                              const EntityDictionary& dict, Gateway& gateway,
                              const AskConfig& cfg, std::size_t repeats);

// Whether an answer resolves the record correctly: matched against the
// correct option when one exists, otherwise against the gold attribution.
bool is_correct_answer(const BenchmarkRecord& record, const Answer& answer);

} // namespace litsearch
