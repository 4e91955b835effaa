#include "exactcoreset/rng.hpp"

#include <unordered_set>

namespace exactcoreset {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  if (k >= n) {
    picked.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      picked[i] = i;
    }
    return picked;
  }
  if (k > n / 3) {
    // Dense regime: partial Fisher-Yates over an index table.
    std::vector<std::size_t> table(n);
    for (std::size_t i = 0; i < n; ++i) {
      table[i] = i;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
      std::swap(table[i], table[j]);
      picked.push_back(table[i]);
    }
    return picked;
  }
  std::unordered_set<std::size_t> seen;
  while (picked.size() < k) {
    const auto candidate = static_cast<std::size_t>(uniform_index(rng, n));
    if (seen.insert(candidate).second) {
      picked.push_back(candidate);
    }
  }
  return picked;
}

}  // namespace exactcoreset
