#include "litsearch/textproc.hpp"

#include "litsearch/porter2.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace litsearch {

namespace {

bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

bool digits_only(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Words that end with '.' without ending a sentence. Matched case-sensitively
// so that a capitalized single letter ("A.") still closes a sentence while
// "e.g." does not.
constexpr std::array<const char*, 36> kAbbreviations{
    "Fig", "Figs", "Dr", "Mr", "Mrs", "Ms", "Prof", "No", "Eq", "Eqs",
    "Ref", "Refs", "Tab", "Vol", "Vols", "Jr", "Sr", "St", "Mt", "Univ",
    "Dept", "Corp", "Inc", "Ltd", "Co", "ca", "cf", "vs", "al", "etc",
    "resp", "approx", "e", "g", "i", "est",
};

bool is_abbreviation(const std::string& word) {
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
           kAbbreviations.end();
}

// The alphabetic run immediately before position `pos` (exclusive).
std::string word_before(const std::string& text, std::size_t pos) {
    std::size_t end = pos;
    std::size_t begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(text[begin - 1]))) --begin;
    return text.substr(begin, end - begin);
}

} // namespace

std::vector<Token> tokenize(const std::string& text,
                            const std::unordered_set<std::string>& stopwords) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_token_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_token_char(static_cast<unsigned char>(text[j]))) ++j;
        std::string word = lower_ascii(text.substr(i, j - i));
        if (!stopwords.contains(word) && !digits_only(word)) {
            std::string stem = porter2_stem(word);
            if (!stem.empty() && !stopwords.contains(stem) && !digits_only(stem)) {
                out.push_back({std::move(stem), i, j});
            }
        }
        i = j;
    }
    return out;
}

std::vector<std::string> tokenize_stems(const std::string& text,
                                        const std::unordered_set<std::string>& stopwords) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text, stopwords)) out.push_back(std::move(t.stem));
    return out;
}

std::vector<SentenceSpan> split_sentences(const std::string& text) {
    std::vector<SentenceSpan> spans;
    if (text.empty()) return spans;
    std::size_t start = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        // treat a punctuation run ("?!", "...") as one terminator
        std::size_t run_end = i;
        while (run_end + 1 < n &&
               (text[run_end + 1] == '.' || text[run_end + 1] == '!' || text[run_end + 1] == '?')) {
            ++run_end;
        }
        std::size_t after = run_end + 1;
        if (after >= n) break; // final sentence, no split needed
        if (!std::isspace(static_cast<unsigned char>(text[after]))) {
            i = after;
            continue;
        }
        std::size_t next = after;
        while (next < n && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
        if (next >= n) break;
        unsigned char first = static_cast<unsigned char>(text[next]);
        if (!std::isupper(first) && !std::isdigit(first)) {
            i = after;
            continue;
        }
        if (c == '.' && i == run_end && is_abbreviation(word_before(text, i))) {
            i = after;
            continue;
        }
        spans.push_back({start, next});
        start = next;
        i = next;
    }
    if (start < n) spans.push_back({start, n});
    return spans;
}

std::size_t count_words(const std::string& text) {
    std::size_t count = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

namespace {

struct StreamSentence {
    std::string text; // trimmed
    std::string section_id;
    std::size_t words;
};

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

void append_sentences(const std::string& text, const std::string& section_id,
                      std::vector<StreamSentence>& out) {
    for (const auto& span : split_sentences(text)) {
        std::string t = trim(text.substr(span.begin, span.end - span.begin));
        if (t.empty()) continue;
        std::size_t w = count_words(t);
        out.push_back({std::move(t), section_id, w});
    }
}

Chunk make_chunk(const Document& doc, std::size_t ordinal,
                 const std::vector<StreamSentence>& sentences) {
    Chunk c;
    c.chunk_id = doc.doc_id + "/c" + std::to_string(ordinal);
    c.doc_id = doc.doc_id;
    for (const auto& s : sentences) {
        if (c.section_ids.empty() || c.section_ids.back() != s.section_id) {
            if (std::find(c.section_ids.begin(), c.section_ids.end(), s.section_id) ==
                c.section_ids.end()) {
                c.section_ids.push_back(s.section_id);
            }
        }
        if (!c.text.empty()) c.text += ' ';
        c.text += s.text;
        c.word_count += s.words;
    }
    return c;
}

// Minimal trailing run reaching overlap_words. Never the whole chunk, and
// never allowed to exceed max_chunk_words on its own.
std::vector<StreamSentence> overlap_tail(const std::vector<StreamSentence>& sentences,
                                         const ChunkingConfig& cfg) {
    std::vector<StreamSentence> tail;
    std::size_t words = 0;
    for (std::size_t k = sentences.size(); k-- > 1;) {
        if (words >= cfg.overlap_words) break;
        if (words + sentences[k].words > cfg.max_chunk_words) break;
        tail.push_back(sentences[k]);
        words += sentences[k].words;
    }
    std::reverse(tail.begin(), tail.end());
    return tail;
}

} // namespace

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg) {
    std::vector<StreamSentence> stream;
    for (const auto& section : doc.sections) {
        std::string heading = trim(section.heading);
        if (!heading.empty()) {
            stream.push_back({heading, section.section_id, count_words(heading)});
        }
        append_sentences(section.text, section.section_id, stream);
    }

    std::vector<Chunk> chunks;
    std::vector<StreamSentence> current;
    std::size_t current_words = 0;
    std::size_t fresh = 0; // sentences added beyond the carried overlap

    auto close_current = [&] {
        chunks.push_back(make_chunk(doc, chunks.size(), current));
        auto tail = overlap_tail(current, cfg);
        current = std::move(tail);
        current_words = 0;
        for (const auto& s : current) current_words += s.words;
        fresh = 0;
    };

    for (auto& sentence : stream) {
        if (fresh > 0 && current_words + sentence.words > cfg.max_chunk_words) {
            close_current();
        }
        current_words += sentence.words;
        current.push_back(std::move(sentence));
        ++fresh;
    }
    if (fresh > 0) {
        chunks.push_back(make_chunk(doc, chunks.size(), current));
    }
    return chunks;
}

} // namespace litsearch
