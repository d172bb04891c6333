#include "litsearch/textproc.hpp"

#include "litsearch/errors.hpp"

#include <fstream>

namespace litsearch {

namespace {

// Pinned list, 175 words. Changing it changes every index, so treat it as
// versioned data: edit only together with the index format version.
const char* const kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "all", "also", "am",
    "an", "and", "any", "are", "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "cannot",
    "could", "did", "do", "does", "doing", "down", "during", "each",
    "either", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "however", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "may", "me", "might", "more", "most", "must", "my",
    "myself", "neither", "no", "nor", "not", "now", "of", "off", "on",
    "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "per", "same", "shall", "she", "should", "since", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "therefore", "these", "they", "this",
    "those", "through", "thus", "to", "too", "under", "until", "up", "upon",
    "very", "via", "was", "we", "were", "what", "when", "where", "whether",
    "which", "while", "who", "whom", "whose", "why", "will", "with",
    "within", "without", "would", "you", "your", "yours", "yourself",
    "yourselves", "although", "among", "anyone", "anything", "around",
    "became", "become", "becomes", "beside", "besides", "beyond", "cant",
    "co", "de", "done", "due", "else", "elsewhere", "etc", "ever", "every",
    "everyone", "everything", "except", "hence", "herein", "hereby",
    "inc", "indeed", "instead",
};

} // namespace

const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> set(std::begin(kStopwords),
                                                     std::end(kStopwords));
    return set;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open stopword file: " + path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(line);
    }
    return out;
}

} // namespace litsearch
