#include "litsearch/pipeline.hpp"

#include "litsearch/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

using nlohmann::json;

namespace litsearch {

namespace {

std::vector<std::string> ordered_unique(const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    for (const auto& id : ids) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

Answer declined_answer() {
    Answer a;
    a.declined = true;
    a.text = "insufficient information";
    return a;
}

} // namespace

std::vector<Chunk> chunks_for_document(const Document& doc, const ChunkingConfig& cfg) {
    if (!doc.sections.empty()) {
        auto chunks = chunk_document(doc, cfg);
        if (!chunks.empty()) return chunks;
    }
    Chunk c;
    c.chunk_id = doc.doc_id + "/c0";
    c.doc_id = doc.doc_id;
    c.text = doc.title;
    if (!doc.abstract_text.empty()) {
        if (!c.text.empty()) c.text += ' ';
        c.text += doc.abstract_text;
    }
    c.word_count = count_words(c.text);
    if (c.text.empty()) return {};
    return {c};
}

AnswerBundle ask(const std::string& question, const InvertedIndex& doc_index,
                 const std::vector<Document>& corpus, const EntityDictionary& dict,
                 Gateway& gateway, const AskConfig& cfg,
                 const std::optional<std::vector<std::string>>& multiple_choice) {
    if (doc_index.granularity() != Granularity::document) {
        throw InputError("ask requires a document-granularity index");
    }

    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus) by_id.emplace(d.doc_id, &d);

    AnswerBundle bundle;

    auto mentions = ner_agent(question, dict);
    bundle.trace.term_set = search_terms_agent(question, mentions, gateway);

    bundle.trace.search_hits = execute_search(doc_index, bundle.trace.term_set, cfg.recency,
                                              cfg.date_cutoff, cfg.top_docs, cfg.bm25l,
                                              cfg.boosts);
    if (bundle.trace.search_hits.empty()) {
        bundle.answer = declined_answer();
        return bundle;
    }

    std::vector<Chunk> chunks;
    for (const auto& hit : bundle.trace.search_hits) {
        auto it = by_id.find(hit.unit_id);
        if (it == by_id.end()) {
            throw InputError("index unit '" + hit.unit_id + "' is not in the supplied corpus");
        }
        auto doc_chunks = chunks_for_document(*it->second, cfg.chunking);
        chunks.insert(chunks.end(), doc_chunks.begin(), doc_chunks.end());
    }
    if (chunks.empty()) {
        bundle.answer = declined_answer();
        return bundle;
    }

    auto proposed = proposed_answers_agent(question, gateway);
    bundle.trace.proposed.assign(proposed.begin(), proposed.end());

    bundle.trace.reranked =
        rerank(chunks, question, proposed, cfg.top_chunks, cfg.bm25l, cfg.fusion,
               doc_index.stopwords());

    std::unordered_map<std::string, const Chunk*> chunk_by_id;
    for (const auto& c : chunks) chunk_by_id.emplace(c.chunk_id, &c);

    std::vector<ChunkSummary> summaries;
    summaries.reserve(bundle.trace.reranked.size());
    for (const auto& rc : bundle.trace.reranked) {
        summaries.push_back(summarize_agent(question, *chunk_by_id.at(rc.chunk_id), gateway));
    }

    std::vector<ChunkSummary> retained;
    for (const auto& s : summaries) {
        if (s.verdict == Verdict::retained) retained.push_back(s);
    }
    if (cfg.dedup_enabled && !retained.empty()) {
        retained = dedup_agent(question, retained, cfg.dedup_set_size, gateway);
    }
    bundle.retained = retained;
    std::vector<std::string> retained_docs;
    for (const auto& s : retained) retained_docs.push_back(s.doc_id);
    bundle.trace.retained_doc_ids = ordered_unique(retained_docs);

    bundle.answer = answer_agent(question, retained, gateway, multiple_choice);
    bundle.trace.attributed_doc_ids = bundle.answer.attribution;
    return bundle;
}

CoveResult cove(const std::string& question, const InvertedIndex& doc_index,
                const std::vector<Document>& corpus, const EntityDictionary& dict,
                Gateway& gateway, const AskConfig& cfg) {
    CoveResult result;
    result.draft = ask(question, doc_index, corpus, dict, gateway, cfg);

    if (!result.draft.answer.declined) {
        result.statements =
            plan_statements_agent(result.draft.answer.text, cfg.n_statements, gateway);
    }
    if (!result.statements.empty()) {
        result.questions = statements_to_questions_agent(result.statements, gateway);
    }

    for (const auto& verification_question : result.questions) {
        try {
            result.verifications.push_back(
                ask(verification_question, doc_index, corpus, dict, gateway, cfg));
        } catch (const Error&) {
            // a failed verification question degrades to a declined bundle
            AnswerBundle failed;
            failed.answer = declined_answer();
            result.verifications.push_back(std::move(failed));
        }
    }

    if (result.questions.empty()) {
        result.final_text = result.draft.answer.text;
    } else {
        std::vector<std::pair<std::string, std::string>> verifications;
        for (std::size_t i = 0; i < result.questions.size(); ++i) {
            const auto& answer = result.verifications[i].answer;
            verifications.emplace_back(result.questions[i],
                                       answer.declined ? "(no verified answer found)"
                                                       : answer.text);
        }
        result.final_text =
            synthesize_final_agent(question, result.draft.answer.text, verifications, gateway);
    }

    std::set<std::string> union_ids(result.draft.answer.attribution.begin(),
                                    result.draft.answer.attribution.end());
    for (const auto& v : result.verifications) {
        union_ids.insert(v.answer.attribution.begin(), v.answer.attribution.end());
    }
    result.reference_union.assign(union_ids.begin(), union_ids.end());
    return result;
}

std::vector<std::string> collect_references(const std::vector<AnswerBundle>& bundles,
                                            ReferenceMode mode) {
    std::set<std::string> ids;
    for (const auto& b : bundles) {
        const auto& source =
            mode == ReferenceMode::attributed ? b.trace.attributed_doc_ids
                                              : b.trace.retained_doc_ids;
        ids.insert(source.begin(), source.end());
    }
    return {ids.begin(), ids.end()};
}

namespace {

json proposed_to_json(const ProposedAnswer& p) {
    json expansions = json::array();
    for (const auto& [term, synonyms] : p.synonym_expansions) {
        expansions.push_back({{"term", term}, {"synonyms", synonyms}});
    }
    return json{{"text", p.text}, {"expansions", expansions}};
}

ProposedAnswer proposed_from_json(const json& j) {
    ProposedAnswer p;
    p.text = j.at("text").get<std::string>();
    for (const auto& e : j.at("expansions")) {
        p.synonym_expansions.emplace_back(e.at("term").get<std::string>(),
                                          e.at("synonyms").get<std::vector<std::string>>());
    }
    return p;
}

json answer_to_json(const Answer& a) {
    return json{{"text", a.text}, {"attribution", a.attribution}, {"declined", a.declined}};
}

json summary_to_json(const ChunkSummary& s) {
    return json{{"chunk_id", s.chunk_id},
                {"doc_id", s.doc_id},
                {"facts", s.facts},
                {"verdict", s.verdict == Verdict::retained ? "retained" : "rejected"}};
}

json trace_stage_records(const StageTrace& trace) {
    json records = json::array();
    records.push_back({{"stage", "terms"}, {"markup", serialize_search_terms(trace.term_set)}});

    json proposed = json::array();
    for (const auto& p : trace.proposed) proposed.push_back(proposed_to_json(p));
    records.push_back({{"stage", "proposed"}, {"answers", proposed}});

    json search_ids = json::array();
    json search_scores = json::array();
    for (const auto& h : trace.search_hits) {
        search_ids.push_back(h.unit_id);
        search_scores.push_back(h.score);
    }
    records.push_back({{"stage", "search"}, {"ids", search_ids}, {"scores", search_scores}});

    json rerank_ids = json::array();
    json rerank_scores = json::array();
    json rerank_docs = json::array();
    json rerank_ranks = json::array();
    for (const auto& rc : trace.reranked) {
        rerank_ids.push_back(rc.chunk_id);
        rerank_scores.push_back(rc.fused_score);
        rerank_docs.push_back(rc.doc_id);
        json ranks = json::array();
        for (const auto& rank : rc.per_query_ranks) {
            if (rank) {
                ranks.push_back(*rank);
            } else {
                ranks.push_back(nullptr);
            }
        }
        rerank_ranks.push_back(ranks);
    }
    records.push_back({{"stage", "rerank"},
                       {"ids", rerank_ids},
                       {"scores", rerank_scores},
                       {"docs", rerank_docs},
                       {"ranks", rerank_ranks}});

    records.push_back({{"stage", "retention"}, {"ids", trace.retained_doc_ids}});
    records.push_back({{"stage", "attribution"}, {"ids", trace.attributed_doc_ids}});
    return records;
}

} // namespace

std::string trace_to_jsonl(const StageTrace& trace) {
    std::string out;
    for (const auto& record : trace_stage_records(trace)) {
        out += record.dump();
        out += '\n';
    }
    return out;
}

StageTrace trace_from_jsonl(const std::string& text) {
    StageTrace trace;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string stage = j.value("stage", "");
        if (stage == "terms") {
            trace.term_set = parse_search_terms(j.at("markup").get<std::string>());
        } else if (stage == "proposed") {
            for (const auto& p : j.at("answers")) {
                trace.proposed.push_back(proposed_from_json(p));
            }
        } else if (stage == "search") {
            const auto& ids = j.at("ids");
            const auto& scores = j.at("scores");
            for (std::size_t i = 0; i < ids.size(); ++i) {
                SearchHit hit;
                hit.unit_id = ids[i].get<std::string>();
                hit.score = scores[i].get<double>();
                trace.search_hits.push_back(std::move(hit));
            }
        } else if (stage == "rerank") {
            const auto& ids = j.at("ids");
            const auto& scores = j.at("scores");
            const auto& docs = j.at("docs");
            const auto& ranks = j.at("ranks");
            for (std::size_t i = 0; i < ids.size(); ++i) {
                RankedChunk rc;
                rc.chunk_id = ids[i].get<std::string>();
                rc.fused_score = scores[i].get<double>();
                rc.doc_id = docs[i].get<std::string>();
                for (const auto& rank : ranks[i]) {
                    if (rank.is_null()) {
                        rc.per_query_ranks.push_back(std::nullopt);
                    } else {
                        rc.per_query_ranks.push_back(rank.get<std::size_t>());
                    }
                }
                trace.reranked.push_back(std::move(rc));
            }
        } else if (stage == "retention") {
            trace.retained_doc_ids = j.at("ids").get<std::vector<std::string>>();
        } else if (stage == "attribution") {
            trace.attributed_doc_ids = j.at("ids").get<std::vector<std::string>>();
        } else {
            throw ParseError("trace line " + std::to_string(line_no) + ": unknown stage '" +
                             stage + "'");
        }
    }
    return trace;
}

std::string bundle_to_json(const AnswerBundle& bundle) {
    json j;
    j["answer"] = answer_to_json(bundle.answer);
    json retained = json::array();
    for (const auto& s : bundle.retained) retained.push_back(summary_to_json(s));
    j["retained"] = retained;
    j["trace"] = trace_stage_records(bundle.trace);
    return j.dump(2);
}

std::string cove_to_json(const CoveResult& result) {
    json j;
    j["draft"] = json::parse(bundle_to_json(result.draft));
    j["statements"] = result.statements;
    j["questions"] = result.questions;
    json verifications = json::array();
    for (const auto& v : result.verifications) {
        verifications.push_back(json::parse(bundle_to_json(v)));
    }
    j["verifications"] = verifications;
    j["final"] = result.final_text;
    j["reference_union"] = result.reference_union;
    return j.dump(2);
}

namespace {

std::optional<Date> read_date(const json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    auto text = j.at(key).get<std::string>();
    auto date = parse_iso_date(text);
    if (!date) throw ParseError("config key '" + key + "' is not an ISO date: " + text);
    return date;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        cfg.ask.top_docs = j.value("top_docs", cfg.ask.top_docs);
        cfg.ask.top_chunks = j.value("top_chunks", cfg.ask.top_chunks);
        cfg.ask.dedup_enabled = j.value("dedup_enabled", cfg.ask.dedup_enabled);
        cfg.ask.dedup_set_size = j.value("dedup_set_size", cfg.ask.dedup_set_size);
        cfg.ask.n_statements = j.value("n_statements", cfg.ask.n_statements);
        cfg.ask.date_cutoff = read_date(j, "date_cutoff");
        if (j.contains("chunking")) {
            const auto& c = j.at("chunking");
            cfg.ask.chunking.max_chunk_words =
                c.value("max_chunk_words", cfg.ask.chunking.max_chunk_words);
            cfg.ask.chunking.overlap_words =
                c.value("overlap_words", cfg.ask.chunking.overlap_words);
            if (cfg.ask.chunking.overlap_words >= cfg.ask.chunking.max_chunk_words) {
                throw ParseError("chunking.overlap_words must be below max_chunk_words");
            }
        }
        if (j.contains("bm25l")) {
            const auto& b = j.at("bm25l");
            cfg.ask.bm25l.k1 = b.value("k1", cfg.ask.bm25l.k1);
            cfg.ask.bm25l.b = b.value("b", cfg.ask.bm25l.b);
            cfg.ask.bm25l.delta = b.value("delta", cfg.ask.bm25l.delta);
            if (cfg.ask.bm25l.k1 <= 0.0) throw ParseError("bm25l.k1 must be positive");
            if (cfg.ask.bm25l.b < 0.0 || cfg.ask.bm25l.b > 1.0) {
                throw ParseError("bm25l.b must lie in [0,1]");
            }
            if (cfg.ask.bm25l.delta < 0.0) throw ParseError("bm25l.delta must be >= 0");
        }
        if (j.contains("fusion")) {
            cfg.ask.fusion.rrf_k = j.at("fusion").value("rrf_k", cfg.ask.fusion.rrf_k);
            if (cfg.ask.fusion.rrf_k <= 0.0) throw ParseError("fusion.rrf_k must be positive");
        }
        if (j.contains("recency")) {
            const auto& r = j.at("recency");
            cfg.ask.recency.weight = r.value("weight", cfg.ask.recency.weight);
            cfg.ask.recency.half_life_years =
                r.value("half_life_years", cfg.ask.recency.half_life_years);
            if (auto ref = read_date(r, "reference_date")) cfg.ask.recency.reference_date = *ref;
            if (cfg.ask.recency.weight < 0.0) throw ParseError("recency.weight must be >= 0");
            if (cfg.ask.recency.half_life_years <= 0.0) {
                throw ParseError("recency.half_life_years must be positive");
            }
        }
        if (j.contains("boosts")) {
            const auto& b = j.at("boosts");
            cfg.ask.boosts.low = b.value("low", cfg.ask.boosts.low);
            cfg.ask.boosts.medium = b.value("medium", cfg.ask.boosts.medium);
            cfg.ask.boosts.high = b.value("high", cfg.ask.boosts.high);
        }
        cfg.search_top_k = j.value("search_top_k", cfg.search_top_k);
        if (j.contains("provider")) {
            const auto& p = j.at("provider");
            cfg.provider.endpoint = p.value("endpoint", cfg.provider.endpoint);
            cfg.provider.model = p.value("model", cfg.provider.model);
            cfg.provider.credential_env = p.value("credential_env", cfg.provider.credential_env);
            cfg.provider.max_retries = p.value("max_retries", cfg.provider.max_retries);
            cfg.provider.backoff_base =
                std::chrono::milliseconds(p.value("backoff_ms", cfg.provider.backoff_base.count()));
            cfg.provider.request_timeout = std::chrono::milliseconds(
                p.value("timeout_ms", cfg.provider.request_timeout.count()));
            cfg.provider.max_concurrent_requests =
                p.value("max_concurrent_requests", cfg.provider.max_concurrent_requests);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config structure: ") + e.what());
    }
    if (cfg.ask.top_docs == 0) throw ParseError("top_docs must be at least 1");
    if (cfg.ask.top_chunks == 0) throw ParseError("top_chunks must be at least 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

} // namespace litsearch
