#include "preagg/value.hpp"

#include <algorithm>

namespace preagg {

ValueDict ValueDict::from_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  ValueDict dict;
  dict.tokens_ = std::move(tokens);
  dict.index_.reserve(dict.tokens_.size());
  for (std::size_t i = 0; i < dict.tokens_.size(); ++i) {
    dict.index_.emplace(dict.tokens_[i], static_cast<Value>(i));
  }
  return dict;
}

}  // namespace preagg
