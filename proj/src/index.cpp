#include "litsearch/index.hpp"

#include "litsearch/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace litsearch {

namespace {

constexpr int kIndexFormatVersion = 1;

std::string document_full_text(const Document& doc) {
    std::string text = doc.title;
    text += '\n';
    text += doc.abstract_text;
    for (const auto& s : doc.sections) {
        text += '\n';
        if (!s.heading.empty()) {
            text += s.heading;
            text += '\n';
        }
        text += s.text;
    }
    return text;
}

} // namespace

bool is_entity_term(const std::string& term) {
    return term.find(':') != std::string::npos;
}

IndexUnit to_index_unit(const Document& doc) {
    IndexUnit unit;
    unit.id = doc.doc_id;
    unit.text = document_full_text(doc);
    for (const auto& m : doc.entities) unit.entity_terms.push_back(m.entity_id);
    unit.date = doc.pub_date;
    return unit;
}

IndexUnit to_index_unit(const Chunk& chunk, std::optional<Date> date) {
    IndexUnit unit;
    unit.id = chunk.chunk_id;
    unit.text = chunk.text;
    unit.date = date;
    return unit;
}

InvertedIndex InvertedIndex::build(const std::vector<IndexUnit>& units, Granularity granularity,
                                   const std::unordered_set<std::string>& stopwords) {
    InvertedIndex index;
    index.granularity_ = granularity;
    index.stopwords_ = stopwords;

    std::map<std::string, std::map<std::uint32_t, std::uint32_t>> term_counts;
    for (const auto& unit : units) {
        if (index.unit_ordinals_.contains(unit.id)) {
            throw CorpusError("duplicate unit id '" + unit.id + "'");
        }
        auto ordinal = static_cast<std::uint32_t>(index.unit_ids_.size());
        index.unit_ordinals_.emplace(unit.id, ordinal);
        index.unit_ids_.push_back(unit.id);
        index.unit_dates_.push_back(unit.date);

        auto stems = tokenize_stems(unit.text, stopwords);
        index.unit_lengths_.push_back(static_cast<std::uint32_t>(stems.size()));
        for (const auto& stem : stems) ++term_counts[stem][ordinal];
        for (const auto& entity : unit.entity_terms) ++term_counts[entity][ordinal];
    }
    for (auto& [term, counts] : term_counts) {
        auto& list = index.postings_[term];
        list.reserve(counts.size());
        for (auto [ordinal, tf] : counts) list.push_back({ordinal, tf});
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    avgdl_ = 0.0;
    if (!unit_lengths_.empty()) {
        double total = 0.0;
        for (auto len : unit_lengths_) total += len;
        avgdl_ = total / static_cast<double>(unit_lengths_.size());
    }
}

std::optional<std::uint32_t> InvertedIndex::unit_ordinal(const std::string& unit_id) const {
    auto it = unit_ordinals_.find(unit_id);
    if (it == unit_ordinals_.end()) return std::nullopt;
    return it->second;
}

bool InvertedIndex::contains_unit(const std::string& unit_id) const {
    return unit_ordinals_.contains(unit_id);
}

std::uint32_t InvertedIndex::term_frequency(const std::string& term,
                                            std::uint32_t ordinal) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), ordinal,
                                [](const Posting& p, std::uint32_t o) { return p.unit < o; });
    if (pos == list.end() || pos->unit != ordinal) return 0;
    return pos->tf;
}

std::uint32_t InvertedIndex::document_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0;
    return static_cast<std::uint32_t>(it->second.size());
}

double InvertedIndex::bm25l_score_ordinal(const std::vector<std::string>& query_terms,
                                          std::uint32_t ordinal,
                                          const Bm25lParams& params) const {
    const double n = static_cast<double>(unit_count());
    const double dl = unit_length(ordinal);
    const double norm = 1.0 - params.b + params.b * (avgdl_ > 0.0 ? dl / avgdl_ : 0.0);
    double score = 0.0;
    for (const auto& term : query_terms) {
        std::uint32_t tf = term_frequency(term, ordinal);
        if (tf == 0) continue;
        double df = document_frequency(term);
        double idf = std::log((n + 1.0) / (df + 0.5));
        double ctf = static_cast<double>(tf) / norm;
        score += idf * (params.k1 + 1.0) * (ctf + params.delta) /
                 (params.k1 + ctf + params.delta);
    }
    return score;
}

double InvertedIndex::bm25l_score(const std::vector<std::string>& query_terms,
                                  const std::string& unit_id, const Bm25lParams& params) const {
    auto ordinal = unit_ordinal(unit_id);
    if (!ordinal) throw CorpusError("unknown unit id '" + unit_id + "'");
    return bm25l_score_ordinal(query_terms, *ordinal, params);
}

double recency_multiplier(const RecencyParams& recency, const Date& pub_date) {
    if (recency.weight <= 0.0) return 1.0;
    double age_years = std::max(0.0, years_between(pub_date, recency.reference_date));
    return 1.0 + recency.weight * std::exp2(-age_years / recency.half_life_years);
}

namespace {

// A plain term matches a unit when every one of its stems occurs there; its
// score is the summed per-stem BM25L contribution. Entity-identifier terms
// hit the entity postings directly.
struct PreparedTerm {
    std::vector<std::string> keys;
};

struct PreparedGroup {
    std::vector<PreparedTerm> terms;
};

PreparedGroup prepare_group(const TermGroup& group, const InvertedIndex& index) {
    PreparedGroup out;
    for (const auto& term : group.terms) {
        PreparedTerm prepared;
        if (is_entity_term(term)) {
            prepared.keys.push_back(term);
        } else {
            prepared.keys = tokenize_stems(term, index.stopwords());
        }
        out.terms.push_back(std::move(prepared));
    }
    return out;
}

// Best-synonym score for the group; nullopt when no synonym fully matches.
std::optional<double> group_score(const PreparedGroup& group, const InvertedIndex& index,
                                  std::uint32_t ordinal, const Bm25lParams& params) {
    std::optional<double> best;
    for (const auto& term : group.terms) {
        if (term.keys.empty()) continue; // stopword-only term can never match
        bool all_present = true;
        for (const auto& key : term.keys) {
            if (index.term_frequency(key, ordinal) == 0) {
                all_present = false;
                break;
            }
        }
        if (!all_present) continue;
        double score = index.bm25l_score_ordinal(term.keys, ordinal, params);
        if (!best || score > *best) best = score;
    }
    return best;
}

} // namespace

std::vector<SearchHit> execute_search(const InvertedIndex& index, const SearchTermSet& terms,
                                      const RecencyParams& recency,
                                      std::optional<Date> date_cutoff, std::size_t top_k,
                                      const Bm25lParams& params, const BoostWeights& boosts) {
    if (top_k == 0) return {};

    std::vector<PreparedGroup> musts;
    musts.reserve(terms.must_groups.size());
    for (const auto& g : terms.must_groups) musts.push_back(prepare_group(g, index));
    std::vector<PreparedGroup> shoulds;
    shoulds.reserve(terms.should_groups.size());
    for (const auto& g : terms.should_groups) shoulds.push_back(prepare_group(g.group, index));

    std::vector<SearchHit> hits;
    const auto n = static_cast<std::uint32_t>(index.unit_count());
    for (std::uint32_t ordinal = 0; ordinal < n; ++ordinal) {
        if (date_cutoff) {
            auto date = index.unit_date(ordinal);
            if (!date || *date > *date_cutoff) continue;
        }

        SearchHit hit;
        double score = 0.0;
        bool all_musts = true;
        for (std::size_t i = 0; i < musts.size(); ++i) {
            auto s = group_score(musts[i], index, ordinal, params);
            if (!s) {
                all_musts = false;
                break;
            }
            score += *s;
            hit.matched_groups.push_back("must[" + std::to_string(i) + "]");
        }
        if (!all_musts) continue;

        for (std::size_t j = 0; j < shoulds.size(); ++j) {
            auto s = group_score(shoulds[j], index, ordinal, params);
            if (!s) continue;
            score += boosts.weight(terms.should_groups[j].boost) * *s;
            hit.matched_groups.push_back("should[" + std::to_string(j) + "]");
        }

        if (auto date = index.unit_date(ordinal)) {
            score *= recency_multiplier(recency, *date);
        }
        hit.unit_id = index.unit_ids()[ordinal];
        hit.score = score;
        hits.push_back(std::move(hit));
    }

    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.unit_id < b.unit_id;
    });
    if (hits.size() > top_k) hits.resize(top_k);
    return hits;
}

SearchTermSet build_mlt_query(const std::string& text, const InvertedIndex& index,
                              std::size_t n_terms) {
    std::map<std::string, std::size_t> tf;
    for (const auto& stem : tokenize_stems(text, index.stopwords())) ++tf[stem];

    struct Scored {
        std::string stem;
        double score;
    };
    std::vector<Scored> scored;
    const double n = static_cast<double>(index.unit_count());
    for (const auto& [stem, count] : tf) {
        double df = index.document_frequency(stem);
        if (df == 0.0) continue;
        scored.push_back({stem, static_cast<double>(count) * std::log(n / df)});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.stem < b.stem;
    });
    if (scored.size() > n_terms) scored.resize(n_terms);

    SearchTermSet out;
    for (auto& s : scored) {
        out.should_groups.push_back({TermGroup{{std::move(s.stem)}}, Boost::medium});
    }
    return out;
}

void InvertedIndex::save(std::ostream& out) const {
    json header;
    header["format"] = "litsearch-index";
    header["version"] = kIndexFormatVersion;
    header["granularity"] = granularity_ == Granularity::document ? "document" : "chunk";
    out << header.dump() << '\n';

    json stopwords = json::array();
    {
        std::vector<std::string> sorted(stopwords_.begin(), stopwords_.end());
        std::sort(sorted.begin(), sorted.end());
        for (auto& w : sorted) stopwords.push_back(w);
    }
    out << json{{"stopwords", stopwords}}.dump() << '\n';

    for (std::size_t i = 0; i < unit_ids_.size(); ++i) {
        json j;
        j["unit"] = unit_ids_[i];
        j["len"] = unit_lengths_[i];
        if (unit_dates_[i]) j["date"] = unit_dates_[i]->to_iso();
        out << j.dump() << '\n';
    }
    for (const auto& [term, list] : postings_) {
        json postings = json::array();
        for (const auto& p : list) postings.push_back(json::array({p.unit, p.tf}));
        out << json{{"term", term}, {"postings", postings}}.dump() << '\n';
    }
}

void InvertedIndex::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write index file: " + path);
    save(out);
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("index snapshot is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("index header is not valid JSON: ") + e.what());
    }
    if (header.value("format", "") != "litsearch-index") {
        throw ParseError("not a litsearch index snapshot");
    }
    if (header.value("version", 0) != kIndexFormatVersion) {
        throw ParseError("unsupported index format version " +
                         std::to_string(header.value("version", 0)));
    }

    InvertedIndex index;
    index.granularity_ = header.value("granularity", "document") == "chunk"
                             ? Granularity::chunk
                             : Granularity::document;
    std::size_t line_no = 1;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.contains("stopwords")) {
                for (const auto& w : j.at("stopwords")) {
                    index.stopwords_.insert(w.get<std::string>());
                }
            } else if (j.contains("unit")) {
                auto id = j.at("unit").get<std::string>();
                if (index.unit_ordinals_.contains(id)) {
                    throw ParseError("duplicate unit id '" + id + "'");
                }
                index.unit_ordinals_.emplace(id,
                                             static_cast<std::uint32_t>(index.unit_ids_.size()));
                index.unit_ids_.push_back(id);
                index.unit_lengths_.push_back(j.at("len").get<std::uint32_t>());
                if (j.contains("date")) {
                    auto date = parse_iso_date(j.at("date").get<std::string>());
                    if (!date) throw ParseError("bad unit date");
                    index.unit_dates_.push_back(date);
                } else {
                    index.unit_dates_.push_back(std::nullopt);
                }
            } else if (j.contains("term")) {
                auto& list = index.postings_[j.at("term").get<std::string>()];
                for (const auto& p : j.at("postings")) {
                    list.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
                }
            } else {
                throw ParseError("unrecognized record");
            }
        }
    } catch (const json::exception& e) {
        throw ParseError("index snapshot line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError("index snapshot line " + std::to_string(line_no) + ": " + e.what());
    }
    index.finalize();
    return index;
}

InvertedIndex InvertedIndex::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open index file: " + path);
    return load(in);
}

} // namespace litsearch
