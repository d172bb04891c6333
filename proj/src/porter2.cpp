#include "litsearch/porter2.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <initializer_list>

namespace litsearch {

namespace {

// Lowercase y counts as a vowel; the marked consonant form is 'Y'.
bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool has_vowel(const std::string& w, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to && i < w.size(); ++i) {
        if (is_vowel(w[i])) return true;
    }
    return false;
}

bool ends_with(const std::string& w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Longest listed suffix present at the end of w; returns its index or npos.
std::size_t longest_suffix(const std::string& w, std::initializer_list<std::string_view> suffixes) {
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    std::size_t i = 0;
    for (auto s : suffixes) {
        if (s.size() > best_len && ends_with(w, s)) {
            best = i;
            best_len = s.size();
        }
        ++i;
    }
    return best;
}

bool ends_double(const std::string& w) {
    static const char* doubles = "bdfgmnprt";
    std::size_t n = w.size();
    if (n < 2 || w[n - 1] != w[n - 2]) return false;
    return std::strchr(doubles, w[n - 1]) != nullptr;
}

// True when w ends in a short syllable: non-vowel, vowel, non-vowel other
// than w/x/Y; or a two-letter word of vowel then non-vowel.
bool ends_short_syllable(const std::string& w) {
    std::size_t n = w.size();
    if (n == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
    if (n >= 3) {
        char after = w[n - 1];
        return !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(after) &&
               after != 'w' && after != 'x' && after != 'Y';
    }
    return false;
}

struct Exception1 {
    std::string_view word;
    std::string_view stem;
};

// Irregular forms handled before the algorithm proper.
constexpr std::array<Exception1, 18> kException1{{
    {"skis", "ski"},
    {"skies", "sky"},
    {"dying", "die"},
    {"lying", "lie"},
    {"tying", "tie"},
    {"idly", "idl"},
    {"gently", "gentl"},
    {"ugly", "ugli"},
    {"early", "earli"},
    {"only", "onli"},
    {"singly", "singl"},
    {"sky", "sky"},
    {"news", "news"},
    {"howe", "howe"},
    {"atlas", "atlas"},
    {"cosmos", "cosmos"},
    {"bias", "bias"},
    {"andes", "andes"},
}};

// Whole words untouched by step 1b and later.
constexpr std::array<std::string_view, 8> kException2{
    "inning", "outing", "canning", "herring",
    "earring", "proceed", "exceed", "succeed",
};

struct Stemmer {
    std::string w;
    std::size_t p1 = 0; // start of R1
    std::size_t p2 = 0; // start of R2

    bool in_r1(std::size_t pos) const { return pos >= p1; }
    bool in_r2(std::size_t pos) const { return pos >= p2; }

    void mark_ys() {
        if (!w.empty() && w[0] == 'y') w[0] = 'Y';
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';
        }
    }

    void mark_regions() {
        p1 = w.size();
        p2 = w.size();
        std::size_t start = 0;
        for (std::string_view prefix : {"gener", "commun", "arsen"}) {
            if (w.compare(0, prefix.size(), prefix) == 0) {
                start = prefix.size();
                break;
            }
        }
        if (start == 0) {
            start = region_after_vc(0);
        }
        p1 = start;
        p2 = region_after_vc(p1);
    }

    // Position just past the first vowel/non-vowel pair at or after `from`.
    std::size_t region_after_vc(std::size_t from) const {
        std::size_t i = from;
        while (i < w.size() && !is_vowel(w[i])) ++i;
        while (i < w.size() && is_vowel(w[i])) ++i;
        return i < w.size() ? i + 1 : w.size();
    }

    void replace_suffix(std::size_t suffix_len, std::string_view replacement) {
        w.replace(w.size() - suffix_len, suffix_len, replacement);
    }

    void step0() {
        std::size_t hit = longest_suffix(w, {"'", "'s", "'s'"});
        if (hit == std::string::npos) return;
        static constexpr std::size_t lens[] = {1, 2, 3};
        w.erase(w.size() - lens[hit]);
    }

    void step1a() {
        std::size_t hit = longest_suffix(w, {"sses", "ied", "ies", "s", "us", "ss"});
        if (hit == std::string::npos) return;
        switch (hit) {
            case 0: // sses -> ss
                replace_suffix(4, "ss");
                break;
            case 1: // ied
            case 2: // ies -> i when more than one letter precedes, else ie
                if (w.size() > 4) {
                    replace_suffix(3, "i");
                } else {
                    replace_suffix(3, "ie");
                }
                break;
            case 3: // s: delete when a vowel precedes the previous letter
                if (w.size() >= 2 && has_vowel(w, 0, w.size() - 2)) {
                    w.erase(w.size() - 1);
                }
                break;
            default: // us, ss: keep
                break;
        }
    }

    void step1b() {
        std::size_t hit = longest_suffix(w, {"eedly", "eed", "ingly", "edly", "ing", "ed"});
        if (hit == std::string::npos) return;
        static constexpr std::size_t lens[] = {5, 3, 5, 4, 3, 2};
        std::size_t len = lens[hit];
        std::size_t start = w.size() - len;
        if (hit <= 1) { // eedly, eed -> ee when in R1
            if (in_r1(start)) replace_suffix(len, "ee");
            return;
        }
        if (!has_vowel(w, 0, start)) return;
        w.erase(start);
        if (longest_suffix(w, {"at", "bl", "iz"}) != std::string::npos) {
            w += 'e';
        } else if (ends_double(w)) {
            w.erase(w.size() - 1);
        } else if (p1 >= w.size() && ends_short_syllable(w)) {
            w += 'e';
        }
    }

    void step1c() {
        std::size_t n = w.size();
        if (n < 3) return; // needs a preceding non-vowel that is not the first letter
        char last = w[n - 1];
        if ((last == 'y' || last == 'Y') && !is_vowel(w[n - 2])) {
            w[n - 1] = 'i';
        }
    }

    void step2() {
        struct Rule {
            std::string_view suffix;
            std::string_view replacement;
        };
        static constexpr std::array<Rule, 24> rules{{
            {"ational", "ate"}, {"fulness", "ful"}, {"iveness", "ive"},
            {"ization", "ize"}, {"ousness", "ous"}, {"biliti", "ble"},
            {"lessli", "less"}, {"tional", "tion"}, {"alism", "al"},
            {"aliti", "al"},    {"ation", "ate"},   {"entli", "ent"},
            {"fulli", "ful"},   {"iviti", "ive"},   {"ousli", "ous"},
            {"abli", "able"},   {"alli", "al"},     {"anci", "ance"},
            {"ator", "ate"},    {"enci", "ence"},   {"izer", "ize"},
            {"bli", "ble"},     {"ogi", "og"},      {"li", ""},
        }};
        const Rule* best = nullptr;
        for (const auto& r : rules) {
            if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size())) {
                best = &r;
            }
        }
        if (!best || !in_r1(w.size() - best->suffix.size())) return;
        if (best->suffix == "ogi") {
            if (w.size() >= 4 && w[w.size() - 4] == 'l') replace_suffix(3, "og");
            return;
        }
        if (best->suffix == "li") {
            static const char* valid_li = "cdeghkmnrt";
            if (w.size() >= 3 && std::strchr(valid_li, w[w.size() - 3]) != nullptr) {
                w.erase(w.size() - 2);
            }
            return;
        }
        replace_suffix(best->suffix.size(), best->replacement);
    }

    void step3() {
        struct Rule {
            std::string_view suffix;
            std::string_view replacement;
            bool needs_r2;
        };
        static constexpr std::array<Rule, 9> rules{{
            {"ational", "ate", false}, {"tional", "tion", false},
            {"alize", "al", false},    {"icate", "ic", false},
            {"iciti", "ic", false},    {"ative", "", true},
            {"ical", "ic", false},     {"ness", "", false},
            {"ful", "", false},
        }};
        const Rule* best = nullptr;
        for (const auto& r : rules) {
            if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size())) {
                best = &r;
            }
        }
        if (!best || !in_r1(w.size() - best->suffix.size())) return;
        if (best->needs_r2 && !in_r2(w.size() - best->suffix.size())) return;
        replace_suffix(best->suffix.size(), best->replacement);
    }

    void step4() {
        static constexpr std::array<std::string_view, 18> suffixes{
            "ement", "ance", "ence", "able", "ible", "ment",
            "ant",   "ent",  "ism",  "ate",  "iti",  "ous",
            "ive",   "ize",  "ion",  "al",   "er",   "ic",
        };
        std::string_view best;
        for (auto s : suffixes) {
            if (ends_with(w, s) && s.size() > best.size()) best = s;
        }
        if (best.empty() || !in_r2(w.size() - best.size())) return;
        if (best == "ion") {
            char before = w.size() >= 4 ? w[w.size() - 4] : '\0';
            if (before == 's' || before == 't') w.erase(w.size() - 3);
            return;
        }
        w.erase(w.size() - best.size());
    }

    void step5() {
        std::size_t n = w.size();
        if (n == 0) return;
        if (w[n - 1] == 'e') {
            std::string prefix = w.substr(0, n - 1);
            if (in_r2(n - 1) || (in_r1(n - 1) && !ends_short_syllable(prefix))) {
                w.erase(n - 1);
            }
            return;
        }
        if (w[n - 1] == 'l' && in_r2(n - 1) && n >= 2 && w[n - 2] == 'l') {
            w.erase(n - 1);
        }
    }

    void postlude() {
        std::replace(w.begin(), w.end(), 'Y', 'y');
    }
};

} // namespace

std::string porter2_stem(std::string_view word) {
    std::string raw(word);
    for (const auto& e : kException1) {
        if (raw == e.word) return std::string(e.stem);
    }
    if (raw.size() < 3) return raw;

    Stemmer s;
    s.w = std::move(raw);
    if (s.w[0] == '\'') s.w.erase(0, 1);
    s.mark_ys();
    s.mark_regions();

    s.step0();
    s.step1a();
    for (auto e : kException2) {
        if (s.w == e) return std::string(e);
    }
    s.step1b();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    s.postlude();
    return s.w;
}

} // namespace litsearch
