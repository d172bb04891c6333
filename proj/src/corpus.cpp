#include "litsearch/corpus.hpp"

#include "litsearch/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

using nlohmann::json;

namespace litsearch {

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct WordSpan {
    std::size_t begin;
    std::size_t end;
    std::string lowered;
};

std::vector<WordSpan> word_spans(const std::string& text) {
    std::vector<WordSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
        out.push_back({i, j, lower_ascii(text.substr(i, j - i))});
        i = j;
    }
    return out;
}

// Dictionary surfaces are keyed by their normalized token sequence joined
// with single spaces, which makes matching whole-token and case-insensitive.
std::string surface_key(const std::string& surface) {
    auto spans = word_spans(surface);
    std::string key;
    for (const auto& s : spans) {
        if (!key.empty()) key += ' ';
        key += s.lowered;
    }
    return key;
}

void scan_field(const std::string& text, const std::string& field_name,
                const EntityDictionary& dict, std::vector<EntityMention>& out) {
    auto spans = word_spans(text);
    std::size_t i = 0;
    while (i < spans.size()) {
        // longest dictionary surface starting at token i wins
        std::size_t best_len = 0;
        const std::vector<DictEntry>* best = nullptr;
        std::string key;
        std::size_t limit = std::min(dict.max_surface_tokens(), spans.size() - i);
        for (std::size_t len = 1; len <= limit; ++len) {
            if (len == 1) {
                key = spans[i].lowered;
            } else {
                key += ' ';
                key += spans[i + len - 1].lowered;
            }
            auto it = dict.entries().find(key);
            if (it != dict.entries().end()) {
                best_len = len;
                best = &it->second;
            }
        }
        if (best != nullptr) {
            std::size_t begin = spans[i].begin;
            std::size_t end = spans[i + best_len - 1].end;
            for (const auto& entry : *best) {
                EntityMention m;
                m.surface = text.substr(begin, end - begin);
                m.begin = begin;
                m.end = end;
                m.entity_id = entry.entity_id;
                m.entity_type = entry.entity_type;
                m.field = field_name;
                out.push_back(std::move(m));
            }
            i += best_len;
        } else {
            ++i;
        }
    }
}

json mention_to_json(const EntityMention& m) {
    return json{{"surface", m.surface}, {"begin", m.begin},           {"end", m.end},
                {"entity_id", m.entity_id}, {"entity_type", to_string(m.entity_type)},
                {"field", m.field}};
}

EntityMention mention_from_json(const json& j) {
    EntityMention m;
    m.surface = j.at("surface").get<std::string>();
    m.begin = j.at("begin").get<std::size_t>();
    m.end = j.at("end").get<std::size_t>();
    m.entity_id = j.at("entity_id").get<std::string>();
    auto type = entity_type_from_string(j.at("entity_type").get<std::string>());
    if (!type) throw ParseError("unknown entity_type: " + j.at("entity_type").dump());
    m.entity_type = *type;
    m.field = j.at("field").get<std::string>();
    return m;
}

} // namespace

std::string to_string(EntityType type) {
    return type == EntityType::gene ? "gene" : "disease";
}

std::optional<EntityType> entity_type_from_string(const std::string& text) {
    if (text == "gene") return EntityType::gene;
    if (text == "disease") return EntityType::disease;
    return std::nullopt;
}

void EntityDictionary::add(const std::string& surface, const std::string& entity_id,
                           EntityType type) {
    std::string key = surface_key(surface);
    if (key.empty()) throw CorpusError("dictionary surface is empty: '" + surface + "'");
    if (entity_id.empty()) throw CorpusError("dictionary entity_id is empty for surface '" + surface + "'");
    auto& bucket = entries_[key];
    for (const auto& e : bucket) {
        if (e.entity_type == type) {
            if (e.entity_id == entity_id) return; // duplicate row, fine
            throw CorpusError("surface '" + surface + "' maps to two " + to_string(type) +
                              " ids: " + e.entity_id + " and " + entity_id);
        }
    }
    bucket.push_back({entity_id, type});
    std::size_t tokens = static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
    max_surface_tokens_ = std::max(max_surface_tokens_, tokens);
}

std::vector<DictEntry> EntityDictionary::lookup(const std::string& surface) const {
    auto it = entries_.find(surface_key(surface));
    if (it == entries_.end()) return {};
    return it->second;
}

EntityDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open dictionary file: " + path);
    EntityDictionary dict;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string surface, entity_id, type_text;
        if (!std::getline(row, surface, '\t') || !std::getline(row, entity_id, '\t') ||
            !std::getline(row, type_text, '\t')) {
            throw CorpusError(path + ":" + std::to_string(line_no) +
                              ": expected surface<TAB>entity_id<TAB>entity_type");
        }
        auto type = entity_type_from_string(type_text);
        if (!type) {
            throw CorpusError(path + ":" + std::to_string(line_no) +
                              ": unknown entity_type '" + type_text + "'");
        }
        dict.add(surface, entity_id, *type);
    }
    return dict;
}

std::vector<Document> ingest_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path);
    return ingest_corpus_stream(in, path);
}

std::vector<Document> ingest_corpus_stream(std::istream& in, const std::string& source_name) {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> seen; // doc_id -> first line
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(source_name + ":" + std::to_string(line_no) +
                              ": malformed record: " + e.what());
        }
        Document doc;
        try {
            doc.doc_id = j.at("doc_id").get<std::string>();
            doc.title = j.at("title").get<std::string>();
            doc.abstract_text = j.at("abstract").get<std::string>();
            auto date = parse_iso_date(j.at("pub_date").get<std::string>());
            if (!date) throw ParseError("pub_date is not an ISO-8601 date");
            doc.pub_date = *date;
            if (j.contains("sections")) {
                std::unordered_set<std::string> section_ids;
                for (const auto& js : j.at("sections")) {
                    Section s;
                    s.section_id = js.at("section_id").get<std::string>();
                    s.heading = js.value("heading", std::string{});
                    s.text = js.at("text").get<std::string>();
                    if (!section_ids.insert(s.section_id).second) {
                        throw ParseError("duplicate section_id '" + s.section_id + "'");
                    }
                    doc.sections.push_back(std::move(s));
                }
            }
            if (j.contains("entities")) {
                for (const auto& jm : j.at("entities")) {
                    doc.entities.push_back(mention_from_json(jm));
                }
            }
        } catch (const json::exception& e) {
            throw CorpusError(source_name + ":" + std::to_string(line_no) +
                              ": incomplete record: " + e.what());
        } catch (const ParseError& e) {
            throw CorpusError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (doc.doc_id.empty()) {
            throw CorpusError(source_name + ":" + std::to_string(line_no) + ": empty doc_id");
        }
        auto [it, inserted] = seen.emplace(doc.doc_id, line_no);
        if (!inserted) {
            throw CorpusError(source_name + ": duplicate doc_id '" + doc.doc_id + "' on lines " +
                              std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::string serialize_corpus(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& doc : docs) {
        json j;
        j["doc_id"] = doc.doc_id;
        j["title"] = doc.title;
        j["abstract"] = doc.abstract_text;
        j["pub_date"] = doc.pub_date.to_iso();
        json sections = json::array();
        for (const auto& s : doc.sections) {
            sections.push_back({{"section_id", s.section_id}, {"heading", s.heading}, {"text", s.text}});
        }
        j["sections"] = sections;
        if (!doc.entities.empty()) {
            json mentions = json::array();
            for (const auto& m : doc.entities) mentions.push_back(mention_to_json(m));
            j["entities"] = mentions;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_corpus(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write corpus file: " + path);
    out << serialize_corpus(docs);
}

std::vector<EntityMention> find_mentions(const std::string& text, const EntityDictionary& dict,
                                         const std::string& field_name) {
    std::vector<EntityMention> out;
    scan_field(text, field_name, dict, out);
    return out;
}

Document annotate_entities(const Document& doc, const EntityDictionary& dict) {
    Document out = doc;
    out.entities.clear();
    scan_field(out.title, "title", dict, out.entities);
    scan_field(out.abstract_text, "abstract", dict, out.entities);
    for (const auto& s : out.sections) {
        scan_field(s.text, s.section_id, dict, out.entities);
    }
    return out;
}

std::vector<DictEntry> normalize_surface(const std::string& surface,
                                         const EntityDictionary& dict) {
    if (surface.empty()) return {};
    return dict.lookup(surface);
}

} // namespace litsearch
