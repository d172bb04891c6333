#pragma once

#include "litsearch/corpus.hpp"

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

namespace litsearch {

// The pinned English stopword list shipped with the artifact (175 words).
const std::unordered_set<std::string>& default_stopwords();

// One word per line, UTF-8; '#' lines ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

struct Token {
    std::string stem;
    std::size_t begin = 0; // source span in the original text
    std::size_t end = 0;

    bool operator==(const Token&) const = default;
};

// Lowercases, splits on non-alphanumeric boundaries, drops stopwords and
// digits-only tokens, and stems with the Snowball English algorithm. The
// filters run again on the stem so output never contains a stopword or a
// digits-only token.
std::vector<Token> tokenize(const std::string& text,
                            const std::unordered_set<std::string>& stopwords);

std::vector<std::string> tokenize_stems(const std::string& text,
                                        const std::unordered_set<std::string>& stopwords);

struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Sentence boundaries sit at .!? followed by whitespace and an uppercase or
// digit start; a curated abbreviation list suppresses false '.' boundaries.
// The returned spans partition the text.
std::vector<SentenceSpan> split_sentences(const std::string& text);

// Whitespace-separated word count.
std::size_t count_words(const std::string& text);

struct ChunkingConfig {
    std::size_t max_chunk_words = 10000;
    std::size_t overlap_words = 250;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::vector<std::string> section_ids;
    std::string text;
    std::size_t word_count = 0;

    bool operator==(const Chunk&) const = default;
};

// Packs whole sentences greedily into chunks of at most max_chunk_words,
// repeating the minimal trailing-sentence run of >= overlap_words at the
// head of the following chunk. Sentences are never split, so a single
// oversized sentence becomes a chunk on its own. Consecutive short sections
// may share a chunk; every contributing section_id is recorded.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg);

} // namespace litsearch
