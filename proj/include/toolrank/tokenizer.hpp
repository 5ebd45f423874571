#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace toolrank {

/// Lowercases ASCII and splits on every non-alphanumeric byte. Empty tokens
/// are dropped; order and multiplicity are preserved.
std::vector<std::string> tokenize(std::string_view text);

std::unordered_set<std::string> token_set(std::string_view text);

}  // namespace toolrank
