#pragma once

#include <optional>
#include <string>
#include <vector>

namespace litsearch {

enum class Boost { low, medium, high };

std::string to_string(Boost boost);
std::optional<Boost> boost_from_string(const std::string& text);

// Synonyms naming one concept; a unit matches the group when any synonym
// matches. Terms containing ':' are normalized entity identifiers and are
// matched against entity annotations instead of tokenized text.
struct TermGroup {
    std::vector<std::string> terms;

    bool operator==(const TermGroup&) const = default;
};

struct ShouldGroup {
    TermGroup group;
    Boost boost = Boost::medium;

    bool operator==(const ShouldGroup&) const = default;
};

// Conjunctive must groups plus optional score-boosting should groups.
struct SearchTermSet {
    std::vector<TermGroup> must_groups;
    std::vector<ShouldGroup> should_groups;

    bool empty() const { return must_groups.empty() && should_groups.empty(); }
    bool operator==(const SearchTermSet&) const = default;
};

// Parses the <terms> markup (elements terms, must, should, term, boost;
// boost values LOW|MEDIUM|HIGH). Whitespace-tolerant. Throws ParseError on
// malformed markup, an empty group, a should group without a boost, or an
// unknown boost value.
SearchTermSet parse_search_terms(const std::string& markup);

// Canonical two-space-indented markup; parse_search_terms inverts it exactly.
std::string serialize_search_terms(const SearchTermSet& terms);

} // namespace litsearch
