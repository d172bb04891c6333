#pragma once

#include <string>
#include <string_view>

namespace litsearch {

// Snowball English (Porter2) stemmer. Expects a lowercase word; bytes
// outside a-z are treated as consonants and pass through untouched.
std::string porter2_stem(std::string_view word);

} // namespace litsearch
