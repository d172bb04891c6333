#include "litsearch/agents.hpp"

#include "litsearch/errors.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace litsearch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) out.push_back(std::move(line));
    }
    return out;
}

// Runs one completion, parses it, and re-prompts once with the parse error
// appended before giving up. Gateway errors propagate untouched.
template <typename T>
T run_with_reprompt(Gateway& gateway, const Prompt& prompt,
                    const std::function<T(const std::string&)>& parse,
                    const std::string& agent_name) {
    std::string first_error;
    try {
        return parse(gateway.complete(prompt).text);
    } catch (const ParseError& e) {
        first_error = e.what();
    }
    Prompt retry = prompt;
    retry.user += "\n\nYour previous reply could not be parsed (";
    retry.user += first_error;
    retry.user += "). Reply again and follow the required output format exactly.";
    try {
        return parse(gateway.complete(retry).text);
    } catch (const ParseError& e) {
        throw AgentOutputError(agent_name + ": unparseable output after re-prompt: " + e.what());
    }
}

} // namespace

std::optional<std::string> extract_tag_block(const std::string& text, const std::string& tag) {
    std::string open = "<" + tag + ">";
    std::string close = "</" + tag + ">";
    std::size_t begin = text.find(open);
    if (begin == std::string::npos) return std::nullopt;
    std::size_t body = begin + open.size();
    std::size_t end = text.find(close, body);
    if (end == std::string::npos) return std::nullopt;
    return text.substr(body, end - body);
}

std::vector<std::string> extract_all_tag_blocks(const std::string& text, const std::string& tag) {
    std::vector<std::string> out;
    std::string open = "<" + tag + ">";
    std::string close = "</" + tag + ">";
    std::size_t pos = 0;
    for (;;) {
        std::size_t begin = text.find(open, pos);
        if (begin == std::string::npos) break;
        std::size_t body = begin + open.size();
        std::size_t end = text.find(close, body);
        if (end == std::string::npos) break;
        out.push_back(text.substr(body, end - body));
        pos = end + close.size();
    }
    return out;
}

std::string ProposedAnswer::query_text() const {
    std::string out = text;
    for (const auto& [term, synonyms] : synonym_expansions) {
        for (const auto& s : synonyms) {
            out += ' ';
            out += s;
        }
    }
    return out;
}

std::vector<EntityMention> ner_agent(const std::string& question, const EntityDictionary& dict) {
    return find_mentions(question, dict, "question");
}

SearchTermSet search_terms_agent(const std::string& question,
                                 const std::vector<EntityMention>& mentions, Gateway& gateway) {
    Prompt prompt;
    prompt.system =
        "[agent:search-terms] You design keyword queries for a biomedical literature "
        "search engine. Produce groups of search terms for the question: <must> groups "
        "are required (a document must match at least one synonym of every must group) "
        "and <should> groups are optional boosts with a <boost> level of LOW, MEDIUM or "
        "HIGH. Give each concept a group listing the concept and its synonyms as <term> "
        "entries. Use any provided entity identifiers verbatim as their own must group; "
        "generate synonyms for every term that is not an identifier. Think the query "
        "through first, then output exactly one <terms>...</terms> block, for example:\n"
        "<terms>\n  <must>\n    <term>zebrafish</term>\n    <term>Danio rerio</term>\n"
        "  </must>\n  <should>\n    <term>embryo</term>\n    <term>embryonic</term>\n"
        "    <boost>MEDIUM</boost>\n  </should>\n</terms>";
    prompt.user = "Question: " + question;
    if (!mentions.empty()) {
        prompt.user += "\n\nEntity identifiers found in the question:";
        for (const auto& m : mentions) {
            prompt.user += "\n- " + m.surface + " -> " + m.entity_id + " (" +
                           to_string(m.entity_type) + ")";
        }
    }

    auto parse = [](const std::string& completion) {
        auto block = extract_tag_block(completion, "terms");
        if (!block) throw ParseError("no <terms> block in the reply");
        return parse_search_terms("<terms>" + *block + "</terms>");
    };
    SearchTermSet terms = run_with_reprompt<SearchTermSet>(gateway, prompt, parse, "search-terms");

    // Inject identifiers the model dropped, keeping question order.
    for (const auto& m : mentions) {
        bool present = false;
        for (const auto& group : terms.must_groups) {
            if (std::find(group.terms.begin(), group.terms.end(), m.entity_id) !=
                group.terms.end()) {
                present = true;
                break;
            }
        }
        if (!present) {
            terms.must_groups.push_back(TermGroup{{m.entity_id}});
        }
    }
    return terms;
}

namespace {

bool is_key_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '-' || c == '\'';
}

// Up to four words immediately before `bracket`, the key term the synonym
// list expands.
std::string key_term_before(const std::string& text, std::size_t bracket) {
    std::size_t end = bracket;
    while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::size_t start = end;
    for (int words = 0; words < 4; ++words) {
        std::size_t word_start = start;
        while (word_start > 0 && is_key_char(static_cast<unsigned char>(text[word_start - 1]))) {
            --word_start;
        }
        if (word_start == start) break; // no word directly adjacent
        start = word_start;
        if (start == 0 || text[start - 1] != ' ') break;
        if (words + 1 < 4) --start; // step over the single separating space
    }
    while (start < end && text[start] == ' ') ++start;
    return text.substr(start, end - start);
}

} // namespace

std::vector<std::pair<std::string, std::vector<std::string>>> parse_synonym_expansions(
    const std::string& answer_text) {
    static const std::string label = "synonyms/abbreviations:";
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::size_t pos = 0;
    for (;;) {
        std::size_t hit = answer_text.find(label, pos);
        if (hit == std::string::npos) break;
        pos = hit + label.size();

        // the label must open a ( ) or [ ] list
        std::size_t bracket = hit;
        while (bracket > 0 && answer_text[bracket - 1] == ' ') --bracket;
        if (bracket == 0 ||
            (answer_text[bracket - 1] != '(' && answer_text[bracket - 1] != '[')) {
            continue;
        }
        char close_char = answer_text[bracket - 1] == '(' ? ')' : ']';
        std::size_t close = answer_text.find(close_char, hit + label.size());
        if (close == std::string::npos) break;

        std::string key = key_term_before(answer_text, bracket - 1);

        std::vector<std::string> synonyms;
        std::string body = answer_text.substr(hit + label.size(), close - hit - label.size());
        std::istringstream items(body);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (!item.empty()) synonyms.push_back(std::move(item));
        }
        if (!key.empty() && !synonyms.empty()) {
            out.emplace_back(std::move(key), std::move(synonyms));
        }
        pos = close + 1;
    }
    return out;
}

std::array<ProposedAnswer, 3> proposed_answers_agent(const std::string& question,
                                                     Gateway& gateway) {
    Prompt prompt;
    prompt.system =
        "[agent:proposed-answers] You draft plausible long-form answers whose vocabulary "
        "seeds a sparse retrieval query; they need not be correct and may contradict each "
        "other. Write three diverse candidate answers with rationale. After each key term "
        "add a parenthesized list in the form (synonyms/abbreviations: one, two, three). "
        "Output exactly three <answer>...</answer> blocks.";
    prompt.user = "Question: " + question;

    auto parse = [](const std::string& completion) {
        auto blocks = extract_all_tag_blocks(completion, "answer");
        if (blocks.size() < 3) {
            throw ParseError("expected 3 <answer> blocks, found " +
                             std::to_string(blocks.size()));
        }
        std::array<ProposedAnswer, 3> out;
        for (std::size_t i = 0; i < 3; ++i) {
            out[i].text = trim(blocks[i]);
            if (out[i].text.empty()) throw ParseError("empty <answer> block");
            out[i].synonym_expansions = parse_synonym_expansions(out[i].text);
        }
        return out;
    };
    return run_with_reprompt<std::array<ProposedAnswer, 3>>(gateway, prompt, parse,
                                                            "proposed-answers");
}

ChunkSummary summarize_agent(const std::string& question, const Chunk& chunk, Gateway& gateway) {
    Prompt prompt;
    prompt.system =
        "[agent:summarize] You extract the key facts from an article chunk that bear on "
        "a question. Think through the chunk first. Then output <verdict>retained</verdict> "
        "followed by a <facts>...</facts> block with the relevant facts, or "
        "<verdict>rejected</verdict> if the chunk holds nothing relevant.";
    prompt.user = "Question: " + question + "\n\nArticle chunk " + chunk.chunk_id +
                  " (document " + chunk.doc_id + "):\n" + chunk.text;

    auto parse = [&](const std::string& completion) {
        auto verdict_block = extract_tag_block(completion, "verdict");
        if (!verdict_block) throw ParseError("no <verdict> block in the reply");
        std::string verdict = trim(*verdict_block);
        ChunkSummary summary;
        summary.chunk_id = chunk.chunk_id;
        summary.doc_id = chunk.doc_id;
        if (verdict == "rejected") {
            summary.verdict = Verdict::rejected;
            return summary;
        }
        if (verdict != "retained") throw ParseError("unknown verdict '" + verdict + "'");
        auto facts = extract_tag_block(completion, "facts");
        if (!facts || trim(*facts).empty()) {
            throw ParseError("retained verdict without a <facts> block");
        }
        summary.verdict = Verdict::retained;
        summary.facts = trim(*facts);
        return summary;
    };
    return run_with_reprompt<ChunkSummary>(gateway, prompt, parse, "summarize");
}

std::vector<ChunkSummary> dedup_agent(const std::string& question,
                                      const std::vector<ChunkSummary>& summaries,
                                      std::size_t set_size, Gateway& gateway) {
    if (set_size < 2) throw InputError("dedup set_size must be at least 2");

    std::vector<ChunkSummary> retained_input;
    for (const auto& s : summaries) {
        if (s.verdict == Verdict::retained) retained_input.push_back(s);
    }

    std::vector<ChunkSummary> out;
    for (std::size_t window_start = 0; window_start < retained_input.size();
         window_start += set_size) {
        std::size_t window_end = std::min(window_start + set_size, retained_input.size());
        std::size_t window_len = window_end - window_start;
        if (window_len == 1) { // a lone summary has nothing to be deduplicated against
            out.push_back(retained_input[window_start]);
            continue;
        }

        Prompt prompt;
        prompt.system =
            "[agent:dedup] You deduplicate facts across a set of article-chunk summaries. "
            "Compare the summaries, then output a <keep>...</keep> block listing the "
            "numbers of the summaries to keep, comma separated (for example <keep>1, 3</keep>). "
            "Drop any summary that provides no new information compared with the others "
            "in the set.";
        prompt.user = "Question: " + question + "\n";
        for (std::size_t k = 0; k < window_len; ++k) {
            const auto& s = retained_input[window_start + k];
            prompt.user += "\nSummary " + std::to_string(k + 1) + " (document " + s.doc_id +
                           ", chunk " + s.chunk_id + "):\n" + s.facts + "\n";
        }

        auto parse = [window_len](const std::string& completion) {
            auto block = extract_tag_block(completion, "keep");
            if (!block) throw ParseError("no <keep> block in the reply");
            std::vector<bool> keep(window_len, false);
            std::istringstream items(*block);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                std::size_t parsed = 0;
                unsigned long value = 0;
                try {
                    value = std::stoul(item, &parsed);
                } catch (const std::exception&) {
                    throw ParseError("non-numeric keep entry '" + item + "'");
                }
                if (parsed != item.size() || value < 1 || value > window_len) {
                    throw ParseError("keep entry '" + item + "' is out of range");
                }
                keep[value - 1] = true;
            }
            return keep;
        };
        auto keep = run_with_reprompt<std::vector<bool>>(gateway, prompt, parse, "dedup");
        for (std::size_t k = 0; k < window_len; ++k) {
            if (keep[k]) out.push_back(retained_input[window_start + k]);
        }
    }
    return out;
}

Answer answer_agent(const std::string& question, const std::vector<ChunkSummary>& summaries,
                    Gateway& gateway,
                    const std::optional<std::vector<std::string>>& multiple_choice) {
    std::vector<const ChunkSummary*> usable;
    for (const auto& s : summaries) {
        if (s.verdict == Verdict::retained) usable.push_back(&s);
    }
    if (usable.empty()) {
        Answer declined;
        declined.declined = true;
        declined.text = "insufficient information";
        return declined;
    }

    Prompt prompt;
    prompt.system =
        "[agent:answer] You answer a question from the supplied article summaries only. "
        "Think it through first. Then either output <answer>...</answer> with your answer "
        "followed by <attribution>doc ids, comma separated</attribution> citing the "
        "documents the answer rests on, or output <decline>insufficient information"
        "</decline> if the summaries do not support an answer. Cite only supplied "
        "document ids.";
    prompt.user = "Question: " + question + "\n";
    if (multiple_choice && !multiple_choice->empty()) {
        prompt.user += "\nAnswer with exactly one of these options:\n";
        for (std::size_t i = 0; i < multiple_choice->size(); ++i) {
            prompt.user += "- " + (*multiple_choice)[i] + "\n";
        }
    }
    for (const auto* s : usable) {
        prompt.user += "\nSummary (document " + s->doc_id + ", chunk " + s->chunk_id + "):\n" +
                       s->facts + "\n";
    }

    auto parse = [](const std::string& completion) {
        Answer answer;
        auto decline = extract_tag_block(completion, "decline");
        if (decline || completion.find("<decline/>") != std::string::npos) {
            answer.declined = true;
            answer.text = decline ? trim(*decline) : std::string{};
            if (answer.text.empty()) answer.text = "insufficient information";
            return answer;
        }
        auto body = extract_tag_block(completion, "answer");
        if (!body) throw ParseError("no <answer> or <decline> block in the reply");
        answer.text = trim(*body);
        if (answer.text.empty()) throw ParseError("empty <answer> block");
        auto attribution = extract_tag_block(completion, "attribution");
        if (!attribution) throw ParseError("answer without an <attribution> block");
        std::istringstream items(*attribution);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (!item.empty()) answer.attribution.push_back(std::move(item));
        }
        if (answer.attribution.empty()) throw ParseError("empty <attribution> block");
        return answer;
    };
    Answer answer = run_with_reprompt<Answer>(gateway, prompt, parse, "answer");

    if (!answer.declined) {
        for (const auto& doc_id : answer.attribution) {
            bool known = std::any_of(usable.begin(), usable.end(), [&](const ChunkSummary* s) {
                return s->doc_id == doc_id;
            });
            if (!known) {
                throw AttributionError("answer cites '" + doc_id +
                                       "', which is not among the supplied summaries");
            }
        }
    }
    return answer;
}

std::vector<std::string> plan_statements_agent(const std::string& draft_answer,
                                               std::size_t target_count, Gateway& gateway) {
    Prompt prompt;
    prompt.system =
        "[agent:plan-statements] You identify the key factual statements made by a draft "
        "response so each can be verified independently. Output a <statements>...</statements> "
        "block with one statement per line, no numbering.";
    prompt.user = "Identify roughly " + std::to_string(target_count) +
                  " key statements in this draft response:\n\n" + draft_answer;

    auto parse = [](const std::string& completion) {
        auto block = extract_tag_block(completion, "statements");
        if (!block) throw ParseError("no <statements> block in the reply");
        return split_lines(*block);
    };
    return run_with_reprompt<std::vector<std::string>>(gateway, prompt, parse,
                                                       "plan-statements");
}

std::vector<std::string> statements_to_questions_agent(const std::vector<std::string>& statements,
                                                       Gateway& gateway) {
    if (statements.empty()) return {};
    Prompt prompt;
    prompt.system =
        "[agent:questions] You convert factual statements into standalone verification "
        "questions, one question per statement, same order. Output a "
        "<questions>...</questions> block with one question per line, no numbering.";
    prompt.user = "Statements:\n";
    for (const auto& s : statements) prompt.user += s + "\n";

    auto parse = [](const std::string& completion) {
        auto block = extract_tag_block(completion, "questions");
        if (!block) throw ParseError("no <questions> block in the reply");
        return split_lines(*block);
    };
    auto questions = run_with_reprompt<std::vector<std::string>>(gateway, prompt, parse,
                                                                 "questions");
    if (questions.size() > statements.size()) questions.resize(statements.size());
    return questions;
}

std::string synthesize_final_agent(
    const std::string& question, const std::string& draft_answer,
    const std::vector<std::pair<std::string, std::string>>& verifications, Gateway& gateway) {
    Prompt prompt;
    prompt.system =
        "[agent:final-response] You produce a final verified response from a draft answer "
        "and the answers to its verification questions, correcting the draft where the "
        "verifications contradict it. Output one <final>...</final> block.";
    prompt.user = "Question: " + question + "\n\nDraft response:\n" + draft_answer + "\n";
    for (const auto& [q, a] : verifications) {
        prompt.user += "\nVerification question: " + q + "\nVerified answer: " + a + "\n";
    }

    auto parse = [](const std::string& completion) {
        auto block = extract_tag_block(completion, "final");
        if (!block) throw ParseError("no <final> block in the reply");
        std::string final_text = trim(*block);
        if (final_text.empty()) throw ParseError("empty <final> block");
        return final_text;
    };
    return run_with_reprompt<std::string>(gateway, prompt, parse, "final-response");
}

} // namespace litsearch
