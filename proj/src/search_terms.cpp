#include "litsearch/search_terms.hpp"

#include "litsearch/errors.hpp"

#include <cctype>

namespace litsearch {

namespace {

struct Element {
    std::string name;
    std::string text;              // concatenated character data
    std::vector<Element> children;
};

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        std::size_t semi = s.find(';', i);
        if (semi == std::string::npos) throw ParseError("unterminated entity reference");
        std::string name = s.substr(i + 1, semi - i - 1);
        if (name == "amp") out += '&';
        else if (name == "lt") out += '<';
        else if (name == "gt") out += '>';
        else if (name == "quot") out += '"';
        else if (name == "apos") out += '\'';
        else throw ParseError("unknown entity reference '&" + name + ";'");
        i = semi + 1;
    }
    return out;
}

std::string encode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// Minimal element parser: tags without attributes, character data, nothing
// else. Exactly what the term-set markup needs.
class MarkupReader {
public:
    explicit MarkupReader(const std::string& text) : text_(text) {}

    Element parse_document() {
        skip_whitespace();
        Element root = parse_element();
        skip_whitespace();
        if (pos_ != text_.size()) throw ParseError("trailing content after the root element");
        return root;
    }

private:
    Element parse_element() {
        expect('<');
        Element e;
        e.name = read_name();
        skip_whitespace();
        expect('>');
        for (;;) {
            if (pos_ >= text_.size()) throw ParseError("unexpected end of markup inside <" + e.name + ">");
            if (text_[pos_] == '<') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                    pos_ += 2;
                    std::string name = read_name();
                    skip_whitespace();
                    expect('>');
                    if (name != e.name) {
                        throw ParseError("mismatched closing tag </" + name + "> for <" + e.name + ">");
                    }
                    return e;
                }
                e.children.push_back(parse_element());
            } else {
                std::size_t next = text_.find('<', pos_);
                if (next == std::string::npos) throw ParseError("unclosed element <" + e.name + ">");
                e.text += text_.substr(pos_, next - pos_);
                pos_ = next;
            }
        }
    }

    std::string read_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-')) {
            ++pos_;
        }
        if (pos_ == start) throw ParseError("expected a tag name at offset " + std::to_string(pos_));
        return text_.substr(start, pos_ - start);
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw ParseError(std::string("expected '") + c + "' at offset " + std::to_string(pos_));
        }
        ++pos_;
    }

    void skip_whitespace() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

TermGroup parse_group_terms(const Element& e, const std::string& label,
                            std::optional<Boost>* boost_out) {
    if (!trim(e.text).empty()) {
        throw ParseError(label + " contains stray text '" + trim(e.text) + "'");
    }
    TermGroup group;
    for (const auto& child : e.children) {
        if (child.name == "term") {
            if (!child.children.empty()) throw ParseError("<term> must not contain elements");
            std::string term = trim(decode_entities(child.text));
            if (term.empty()) throw ParseError(label + " contains an empty <term>");
            group.terms.push_back(std::move(term));
        } else if (child.name == "boost" && boost_out != nullptr) {
            if (boost_out->has_value()) throw ParseError(label + " has more than one <boost>");
            std::string value = trim(decode_entities(child.text));
            auto boost = boost_from_string(value);
            if (!boost) throw ParseError(label + " has unknown boost value '" + value + "'");
            *boost_out = *boost;
        } else {
            throw ParseError(label + " contains unexpected element <" + child.name + ">");
        }
    }
    if (group.terms.empty()) throw ParseError(label + " has no terms");
    return group;
}

} // namespace

std::string to_string(Boost boost) {
    switch (boost) {
        case Boost::low: return "LOW";
        case Boost::medium: return "MEDIUM";
        case Boost::high: return "HIGH";
    }
    return "MEDIUM";
}

std::optional<Boost> boost_from_string(const std::string& text) {
    if (text == "LOW") return Boost::low;
    if (text == "MEDIUM") return Boost::medium;
    if (text == "HIGH") return Boost::high;
    return std::nullopt;
}

SearchTermSet parse_search_terms(const std::string& markup) {
    MarkupReader reader(markup);
    Element root = reader.parse_document();
    if (root.name != "terms") throw ParseError("root element must be <terms>, got <" + root.name + ">");
    if (!trim(root.text).empty()) throw ParseError("<terms> contains stray text");

    SearchTermSet out;
    std::size_t must_no = 0;
    std::size_t should_no = 0;
    for (const auto& child : root.children) {
        if (child.name == "must") {
            ++must_no;
            out.must_groups.push_back(
                parse_group_terms(child, "must group " + std::to_string(must_no), nullptr));
        } else if (child.name == "should") {
            ++should_no;
            std::string label = "should group " + std::to_string(should_no);
            std::optional<Boost> boost;
            TermGroup group = parse_group_terms(child, label, &boost);
            if (!boost) throw ParseError(label + " is missing its <boost>");
            out.should_groups.push_back({std::move(group), *boost});
        } else {
            throw ParseError("unexpected element <" + child.name + "> under <terms>");
        }
    }
    return out;
}

std::string serialize_search_terms(const SearchTermSet& terms) {
    std::string out = "<terms>\n";
    for (const auto& group : terms.must_groups) {
        out += "  <must>\n";
        for (const auto& term : group.terms) {
            out += "    <term>" + encode_entities(term) + "</term>\n";
        }
        out += "  </must>\n";
    }
    for (const auto& should : terms.should_groups) {
        out += "  <should>\n";
        for (const auto& term : should.group.terms) {
            out += "    <term>" + encode_entities(term) + "</term>\n";
        }
        out += "    <boost>" + to_string(should.boost) + "</boost>\n";
        out += "  </should>\n";
    }
    out += "</terms>";
    return out;
}

} // namespace litsearch
