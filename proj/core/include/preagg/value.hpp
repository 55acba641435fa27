#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace preagg {

/// Uniform 64-bit key type shared by the frequency and rank paths.
/// Categorical values are interned string ids; ordinal values are doubles
/// passed through an order-preserving bijection so that integer comparison
/// of keys matches the double total order.
using Value = std::int64_t;

inline Value ordinal_value(double x) {
  if (std::isnan(x)) {
    throw std::invalid_argument("NaN is not a valid ordinal value");
  }
  if (x == 0.0) x = 0.0;  // collapse -0.0 and +0.0 to one key
  std::int64_t bits = std::bit_cast<std::int64_t>(x);
  return bits ^ ((bits >> 63) & 0x7fffffffffffffffLL);
}

/// Inverse of ordinal_value; the transform is an involution.
inline double ordinal_to_double(Value v) {
  std::int64_t bits = v ^ ((v >> 63) & 0x7fffffffffffffffLL);
  return std::bit_cast<double>(bits);
}

/// Dictionary interning categorical strings to dense ids. Ids are assigned
/// by lexicographic rank so that a dataset's dictionary does not depend on
/// record order.
class ValueDict {
 public:
  ValueDict() = default;

  /// Builds the dictionary from the full token set (deduplicated, sorted).
  static ValueDict from_tokens(std::vector<std::string> tokens);

  Value id_of(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) {
      throw std::out_of_range("unknown categorical value: " + token);
    }
    return it->second;
  }

  const std::string& token_of(Value id) const {
    return tokens_.at(static_cast<std::size_t>(id));
  }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const ValueDict& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Value> index_;
};

}  // namespace preagg
