#include "toolrank/tokenizer.hpp"

#include <cctype>

namespace toolrank {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::unordered_set<std::string> token_set(std::string_view text) {
  auto tokens = tokenize(text);
  return {std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end())};
}

}  // namespace toolrank
