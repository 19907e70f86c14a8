#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adtk {

// Lowercases ASCII letters, turns ASCII punctuation into spaces and splits on
// whitespace. Non-ASCII bytes are kept inside tokens untouched.
std::vector<std::string> normalize_words(std::string_view text);

// normalize_words() joined back with single spaces.
std::string normalize_text(std::string_view text);

// Trim + ASCII case-fold + collapse internal whitespace runs.
std::string canonical_name(std::string_view name);

std::string_view trim(std::string_view s);

}  // namespace adtk
