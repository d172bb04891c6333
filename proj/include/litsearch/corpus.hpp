#pragma once

#include "litsearch/date.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace litsearch {

enum class EntityType { gene, disease };

std::string to_string(EntityType type);
std::optional<EntityType> entity_type_from_string(const std::string& text);

struct EntityMention {
    std::string surface;
    std::size_t begin = 0; // byte offsets into the annotated field
    std::size_t end = 0;
    std::string entity_id;
    EntityType entity_type = EntityType::gene;
    std::string field; // "title", "abstract" or a section_id

    bool operator==(const EntityMention&) const = default;
};

struct Section {
    std::string section_id;
    std::string heading;
    std::string text;

    bool operator==(const Section&) const = default;
};

// One corpus article. Articles without sections are title+abstract-only
// records; pub_date is required because recency boosts and date cutoffs
// depend on it.
struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract_text;
    std::vector<Section> sections;
    Date pub_date;
    std::vector<EntityMention> entities;

    bool operator==(const Document&) const = default;
};

struct DictEntry {
    std::string entity_id;
    EntityType entity_type = EntityType::gene;
};

// Surface-to-identifier dictionary for gene/disease normalization. Surfaces
// are case-normalized; one surface may name at most one entity per type.
class EntityDictionary {
public:
    // surface may be multi-word; throws CorpusError if the same surface maps
    // to two different ids of one entity_type.
    void add(const std::string& surface, const std::string& entity_id, EntityType type);

    // Case-insensitive exact lookup; 0, 1 or 2 entries (one per type).
    std::vector<DictEntry> lookup(const std::string& surface) const;

    bool empty() const { return entries_.empty(); }
    std::size_t max_surface_tokens() const { return max_surface_tokens_; }

    // token-sequence key -> entries for that surface
    const std::unordered_map<std::string, std::vector<DictEntry>>& entries() const {
        return entries_;
    }

private:
    std::unordered_map<std::string, std::vector<DictEntry>> entries_;
    std::size_t max_surface_tokens_ = 1;
};

// Loads a delimited dictionary file with columns surface, entity_id,
// entity_type (tab-separated). Lines starting with '#' are skipped.
EntityDictionary load_dictionary(const std::string& path);

// Reads a line-delimited corpus file (one JSON document per line).
// Throws CorpusError naming the offending line on malformed records and
// naming both lines on duplicate doc_ids.
std::vector<Document> ingest_corpus(const std::string& path);
std::vector<Document> ingest_corpus_stream(std::istream& in, const std::string& source_name);

// One document per line, in the same schema ingest_corpus reads.
std::string serialize_corpus(const std::vector<Document>& docs);
void write_corpus(const std::vector<Document>& docs, const std::string& path);

// Returns a copy of doc with entity mentions for every maximal,
// case-insensitive, whole-token dictionary match in title, abstract and
// section texts. Prior mentions are replaced, so the operation is idempotent.
Document annotate_entities(const Document& doc, const EntityDictionary& dict);

// Mentions found in a free-standing piece of text (used for question NER).
std::vector<EntityMention> find_mentions(const std::string& text,
                                         const EntityDictionary& dict,
                                         const std::string& field_name);

// Case-insensitive exact surface lookup; empty when the surface is unknown.
std::vector<DictEntry> normalize_surface(const std::string& surface,
                                         const EntityDictionary& dict);

} // namespace litsearch
