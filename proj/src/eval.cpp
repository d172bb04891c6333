#include "litsearch/eval.hpp"

#include "litsearch/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

using nlohmann::json;

namespace litsearch {

namespace {

constexpr double kZ95 = 1.96;

std::string trim_lower(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

// mean and 95% CI half-width over per-repeat values (sample stdev / sqrt n)
struct Interval {
    double mean;
    double low;
    double high;
};

Interval normal_interval(const std::vector<double>& per_repeat) {
    Interval out{0.0, 0.0, 0.0};
    const std::size_t n = per_repeat.size();
    if (n == 0) return out;
    double sum = 0.0;
    for (double v : per_repeat) sum += v;
    out.mean = sum / static_cast<double>(n);
    double half = 0.0;
    if (n > 1) {
        double ss = 0.0;
        for (double v : per_repeat) ss += (v - out.mean) * (v - out.mean);
        double stdev = std::sqrt(ss / static_cast<double>(n - 1));
        half = kZ95 * stdev / std::sqrt(static_cast<double>(n));
    }
    out.low = std::clamp(out.mean - half, 0.0, 1.0);
    out.high = std::clamp(out.mean + half, 0.0, 1.0);
    return out;
}

void check_repeat_shape(std::size_t traces, std::size_t gold, std::size_t repeats) {
    if (repeats == 0) throw InputError("repeats must be at least 1");
    if (gold == 0 || traces != gold * repeats) {
        throw InputError("expected " + std::to_string(gold * repeats) +
                         " traces (" + std::to_string(gold) + " questions x " +
                         std::to_string(repeats) + " repeats), got " + std::to_string(traces));
    }
}

std::optional<std::size_t> gold_search_rank(const StageTrace& trace, const std::string& gold) {
    for (std::size_t i = 0; i < trace.search_hits.size(); ++i) {
        if (trace.search_hits[i].unit_id == gold) return i + 1;
    }
    return std::nullopt;
}

} // namespace

std::vector<BenchmarkRecord> load_benchmark_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open benchmark records file: " + path);
    std::vector<BenchmarkRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        BenchmarkRecord r;
        try {
            r.question = j.at("question").get<std::string>();
            if (j.contains("gold_doc_id") && !j.at("gold_doc_id").is_null()) {
                r.gold_doc_id = j.at("gold_doc_id").get<std::string>();
            }
            if (j.contains("key_passage") && !j.at("key_passage").is_null()) {
                r.key_passage = j.at("key_passage").get<std::string>();
            }
            if (j.contains("options")) {
                r.options = j.at("options").get<std::vector<std::string>>();
            }
            if (j.contains("correct_option") && !j.at("correct_option").is_null()) {
                r.correct_option = j.at("correct_option").get<std::string>();
            }
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!r.gold_doc_id && !r.correct_option) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": record needs gold_doc_id or correct_option");
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ReviewRecord> load_review_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open review records file: " + path);
    std::vector<ReviewRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ReviewRecord r;
        try {
            r.review_id = j.at("review_id").get<std::string>();
            r.derived_question = j.at("derived_question").get<std::string>();
            auto date = parse_iso_date(j.at("cutoff_date").get<std::string>());
            if (!date) throw ParseError("cutoff_date is not an ISO date");
            r.cutoff_date = *date;
            r.primary_refs = j.at("primary_refs").get<std::vector<std::string>>();
            if (j.contains("secondary_refs")) {
                r.secondary_refs = j.at("secondary_refs").get<std::vector<std::string>>();
            }
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<CdfRow> source_rank_cdf(const std::vector<StageTrace>& traces,
                                    const std::vector<std::optional<std::string>>& gold,
                                    std::size_t max_rank, std::size_t repeats) {
    check_repeat_shape(traces.size(), gold.size(), repeats);
    if (max_rank == 0) throw InputError("max_rank must be at least 1");
    const std::size_t questions = gold.size();

    std::size_t with_gold = 0;
    for (const auto& g : gold) {
        if (g) ++with_gold;
    }

    // per repeat, counts of gold found at each rank
    std::vector<std::vector<double>> cdf_per_repeat(repeats,
                                                    std::vector<double>(max_rank + 1, 0.0));
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        auto& counts = cdf_per_repeat[rep];
        for (std::size_t q = 0; q < questions; ++q) {
            if (!gold[q]) continue;
            auto rank = gold_search_rank(traces[rep * questions + q], *gold[q]);
            if (rank && *rank <= max_rank) counts[*rank] += 1.0;
        }
        double cumulative = 0.0;
        for (std::size_t r = 1; r <= max_rank; ++r) {
            cumulative += counts[r];
            counts[r] = with_gold > 0 ? cumulative / static_cast<double>(with_gold) : 0.0;
        }
    }

    std::vector<CdfRow> rows;
    rows.reserve(max_rank);
    std::vector<double> per_repeat(repeats);
    for (std::size_t r = 1; r <= max_rank; ++r) {
        for (std::size_t rep = 0; rep < repeats; ++rep) per_repeat[rep] = cdf_per_repeat[rep][r];
        auto interval = normal_interval(per_repeat);
        rows.push_back({r, interval.mean, interval.low, interval.high});
    }
    return rows;
}

std::vector<StageRecallRow> stage_recall(const std::vector<StageTrace>& traces,
                                         const std::vector<std::optional<std::string>>& gold,
                                         std::size_t repeats) {
    check_repeat_shape(traces.size(), gold.size(), repeats);
    const std::size_t questions = gold.size();
    static const char* stage_names[] = {"keyword_retrieval", "reranking", "summary_retention",
                                        "attribution"};

    std::size_t with_gold = 0;
    for (const auto& g : gold) {
        if (g) ++with_gold;
    }

    std::vector<std::vector<double>> per_stage(4, std::vector<double>(repeats, 0.0));
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::size_t survived[4] = {0, 0, 0, 0};
        for (std::size_t q = 0; q < questions; ++q) {
            if (!gold[q]) continue;
            const auto& trace = traces[rep * questions + q];
            const std::string& g = *gold[q];
            bool in_search = gold_search_rank(trace, g).has_value();
            bool in_rerank = std::any_of(trace.reranked.begin(), trace.reranked.end(),
                                         [&](const RankedChunk& rc) { return rc.doc_id == g; });
            bool in_retained = std::find(trace.retained_doc_ids.begin(),
                                         trace.retained_doc_ids.end(),
                                         g) != trace.retained_doc_ids.end();
            bool in_attribution = std::find(trace.attributed_doc_ids.begin(),
                                            trace.attributed_doc_ids.end(),
                                            g) != trace.attributed_doc_ids.end();
            survived[0] += in_search;
            survived[1] += in_rerank;
            survived[2] += in_retained;
            survived[3] += in_attribution;
        }
        for (int s = 0; s < 4; ++s) {
            per_stage[s][rep] = with_gold > 0
                                    ? static_cast<double>(survived[s]) / static_cast<double>(with_gold)
                                    : 0.0;
        }
    }

    std::vector<StageRecallRow> rows;
    for (int s = 0; s < 4; ++s) {
        auto interval = normal_interval(per_stage[s]);
        rows.push_back({stage_names[s], interval.mean, interval.low, interval.high});
    }
    return rows;
}

QaMetrics qa_metrics(const std::vector<QaOutcome>& results) {
    QaMetrics m;
    m.total = results.size();
    for (const auto& r : results) {
        if (r.correct && !r.answered) {
            throw InputError("a result is marked correct but not answered");
        }
        if (r.answered) ++m.attempted;
        if (r.correct) ++m.correct;
    }
    if (m.total > 0) {
        m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
        m.coverage = static_cast<double>(m.attempted) / static_cast<double>(m.total);
    }
    if (m.attempted > 0) {
        m.precision = static_cast<double>(m.correct) / static_cast<double>(m.attempted);
    }
    return m;
}

namespace {

std::optional<double> recall_against(const std::vector<std::string>& refs,
                                     const std::set<std::string>& gold) {
    if (gold.empty()) return std::nullopt;
    std::size_t found = 0;
    std::unordered_set<std::string> seen;
    for (const auto& r : refs) {
        if (gold.contains(r) && seen.insert(r).second) ++found;
    }
    return static_cast<double>(found) / static_cast<double>(gold.size());
}

} // namespace

ReferenceRecall reference_recall(const CoveResult& result, const ReviewRecord& review) {
    std::set<std::string> primary(review.primary_refs.begin(), review.primary_refs.end());
    std::set<std::string> all = primary;
    all.insert(review.secondary_refs.begin(), review.secondary_refs.end());

    ReferenceRecall out;
    out.initial = recall_against(result.draft.answer.attribution, primary);
    out.cove = recall_against(result.reference_union, primary);
    out.initial_with_secondary = recall_against(result.draft.answer.attribution, all);
    out.cove_with_secondary = recall_against(result.reference_union, all);
    return out;
}

std::string cdf_table_csv(const std::vector<CdfRow>& rows) {
    std::string out = "Rank,Mean,Low,High\n";
    for (const auto& r : rows) {
        out += std::to_string(r.rank) + "," + format_number(r.mean) + "," +
               format_number(r.low) + "," + format_number(r.high) + "\n";
    }
    return out;
}

std::string stage_recall_csv(const std::vector<StageRecallRow>& rows) {
    std::string out = "Stage,Recall,Low,High\n";
    for (const auto& r : rows) {
        out += r.stage + "," + format_number(r.recall) + "," + format_number(r.low) + "," +
               format_number(r.high) + "\n";
    }
    return out;
}

std::string qa_metrics_csv(const QaMetrics& m, std::size_t gold_available,
                           std::size_t gold_total) {
    std::string out =
        "Accuracy,Coverage,Precision,Correct,Attempted,Total,GoldAvailable,GoldTotal\n";
    out += format_number(m.accuracy) + "," + format_number(m.coverage) + ",";
    out += m.precision ? format_number(*m.precision) : std::string{};
    out += "," + std::to_string(m.correct) + "," + std::to_string(m.attempted) + "," +
           std::to_string(m.total) + "," + std::to_string(gold_available) + "," +
           std::to_string(gold_total) + "\n";
    return out;
}

std::string review_recall_csv(
    const std::vector<std::pair<std::string, ReferenceRecall>>& rows) {
    auto cell = [](const std::optional<double>& v) {
        return v ? format_number(*v * 100.0) : std::string{};
    };
    std::string out =
        "ReviewId,InitialRecall,CoveRecall,InitialRecallWithSecondary,CoveRecallWithSecondary\n";
    for (const auto& [id, r] : rows) {
        out += id + "," + cell(r.initial) + "," + cell(r.cove) + "," +
               cell(r.initial_with_secondary) + "," + cell(r.cove_with_secondary) + "\n";
    }
    return out;
}

bool is_correct_answer(const BenchmarkRecord& record, const Answer& answer) {
    if (answer.declined) return false;
    if (record.correct_option) {
        std::string got = trim_lower(answer.text);
        std::string want = trim_lower(*record.correct_option);
        if (got == want) return true;
        // accept an option letter when options are listed
        for (std::size_t i = 0; i < record.options.size(); ++i) {
            if (trim_lower(record.options[i]) == want) {
                std::string letter(1, static_cast<char>('a' + i));
                if (got == letter) return true;
            }
        }
        return false;
    }
    if (record.gold_doc_id) {
        return std::find(answer.attribution.begin(), answer.attribution.end(),
                         *record.gold_doc_id) != answer.attribution.end();
    }
    return false;
}

BenchmarkRun run_qa_benchmark(const std::vector<BenchmarkRecord>& records,
                              const InvertedIndex& doc_index,
                              const std::vector<Document>& corpus,
                              const EntityDictionary& dict, Gateway& gateway,
                              const AskConfig& cfg, std::size_t repeats) {
    if (repeats == 0) throw InputError("repeats must be at least 1");
    BenchmarkRun run;
    run.repeats = repeats;
    for (const auto& r : records) {
        run.gold.push_back(r.gold_doc_id);
        if (r.gold_doc_id) {
            ++run.gold_total;
            if (doc_index.contains_unit(*r.gold_doc_id)) ++run.gold_available;
        }
    }

    for (std::size_t rep = 0; rep < repeats; ++rep) {
        for (const auto& record : records) {
            std::optional<std::vector<std::string>> options;
            if (!record.options.empty()) options = record.options;
            try {
                AnswerBundle bundle =
                    ask(record.question, doc_index, corpus, dict, gateway, cfg, options);
                QaOutcome outcome;
                outcome.answered = !bundle.answer.declined;
                outcome.correct = is_correct_answer(record, bundle.answer);
                run.outcomes.push_back(outcome);
                run.traces.push_back(std::move(bundle.trace));
            } catch (const Error&) {
                run.outcomes.push_back({false, false});
                run.traces.push_back(StageTrace{});
            }
        }
    }
    return run;
}

} // namespace litsearch
