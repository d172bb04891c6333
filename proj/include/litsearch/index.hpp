#pragma once

#include "litsearch/corpus.hpp"
#include "litsearch/date.hpp"
#include "litsearch/search_terms.hpp"
#include "litsearch/textproc.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace litsearch {

enum class Granularity { document, chunk };

struct Bm25lParams {
    double k1 = 1.2;
    double b = 0.75;
    double delta = 0.5;
};

struct RecencyParams {
    double weight = 0.2;           // 0 disables the boost
    double half_life_years = 5.0;
    Date reference_date{2025, 1, 1};
};

struct BoostWeights {
    double low = 1.0;
    double medium = 2.0;
    double high = 4.0;

    double weight(Boost boost) const {
        switch (boost) {
            case Boost::low: return low;
            case Boost::medium: return medium;
            case Boost::high: return high;
        }
        return medium;
    }
};

struct SearchHit {
    std::string unit_id;
    double score = 0.0;
    std::vector<std::string> matched_groups; // "must[i]" / "should[j]"

    bool operator==(const SearchHit&) const = default;
};

// Raw material for one index unit. Entity terms are the normalized
// identifiers of the unit's entity mentions, one entry per mention; they are
// indexed verbatim alongside the stemmed text terms.
struct IndexUnit {
    std::string id;
    std::string text;
    std::vector<std::string> entity_terms;
    std::optional<Date> date;
};

IndexUnit to_index_unit(const Document& doc);
IndexUnit to_index_unit(const Chunk& chunk, std::optional<Date> date = std::nullopt);

struct Posting {
    std::uint32_t unit = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

// Term -> postings over fixed units, with per-unit token lengths, dates and
// collection statistics. Immutable once built; concurrent reads are safe.
class InvertedIndex {
public:
    // Throws CorpusError on a duplicate unit id.
    static InvertedIndex build(const std::vector<IndexUnit>& units, Granularity granularity,
                               const std::unordered_set<std::string>& stopwords);

    Granularity granularity() const { return granularity_; }
    std::size_t unit_count() const { return unit_ids_.size(); }
    double avgdl() const { return avgdl_; }

    const std::vector<std::string>& unit_ids() const { return unit_ids_; }
    std::optional<std::uint32_t> unit_ordinal(const std::string& unit_id) const;
    std::uint32_t unit_length(std::uint32_t ordinal) const { return unit_lengths_[ordinal]; }
    std::optional<Date> unit_date(std::uint32_t ordinal) const { return unit_dates_[ordinal]; }
    bool contains_unit(const std::string& unit_id) const;

    std::uint32_t term_frequency(const std::string& term, std::uint32_t ordinal) const;
    std::uint32_t document_frequency(const std::string& term) const;

    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

    // Sum over query terms present in the unit of
    //   idf(t) * (k1+1) * (c'+delta) / (k1 + c' + delta)
    // with c' = tf / (1 - b + b*dl/avgdl) and idf(t) = ln((N+1)/(df+0.5)).
    double bm25l_score(const std::vector<std::string>& query_terms, const std::string& unit_id,
                       const Bm25lParams& params) const;
    double bm25l_score_ordinal(const std::vector<std::string>& query_terms,
                               std::uint32_t ordinal, const Bm25lParams& params) const;

    // Versioned line-delimited snapshot.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static InvertedIndex load(std::istream& in);
    static InvertedIndex load_file(const std::string& path);

private:
    Granularity granularity_ = Granularity::document;
    std::vector<std::string> unit_ids_;
    std::unordered_map<std::string, std::uint32_t> unit_ordinals_;
    std::vector<std::uint32_t> unit_lengths_;
    std::vector<std::optional<Date>> unit_dates_;
    std::map<std::string, std::vector<Posting>> postings_;
    std::unordered_set<std::string> stopwords_;
    double avgdl_ = 0.0;

    void finalize();
};

// True when the term names a normalized entity identifier rather than plain
// keyword text (identifier schemes always carry a ':').
bool is_entity_term(const std::string& term);

// Conjunctive must semantics with OR-ed synonyms, boosted should scoring and
// a bounded multiplicative recency boost. Results sorted by score descending,
// ties by unit id ascending, truncated to top_k.
std::vector<SearchHit> execute_search(const InvertedIndex& index, const SearchTermSet& terms,
                                      const RecencyParams& recency,
                                      std::optional<Date> date_cutoff, std::size_t top_k,
                                      const Bm25lParams& params = {},
                                      const BoostWeights& boosts = {});

// Recency multiplier for a unit of the given age: 1 + w * 2^(-age/half_life).
double recency_multiplier(const RecencyParams& recency, const Date& pub_date);

// "More Like This": the text's top n_terms stems ranked by tf*ln(N/df),
// emitted as singleton MEDIUM should groups. Stems absent from the index are
// excluded.
SearchTermSet build_mlt_query(const std::string& text, const InvertedIndex& index,
                              std::size_t n_terms = 25);

} // namespace litsearch
