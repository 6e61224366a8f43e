#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ae/abbrev.hpp"
#include "ae/noise.hpp"

namespace ae {

struct ExpansionQuery {
  std::vector<std::string> context;  ///< earlier turns, oldest first
  Abbreviation abbreviation;
  bool noisy = false;  ///< accept nearby-key substitutions when filtering
  int k = 5;
};

struct ExpansionOption {
  std::string phrase;  ///< normalized
  int count = 1;
  double score = 0.0;  ///< model log-probability for scored backends, else 0
};

struct ExpansionResult {
  std::vector<ExpansionOption> options;  ///< count descending, at most k
  int raw_sample_count = 0;
};

/// Throws std::invalid_argument when k < 1 or the abbreviation is empty.
void validate(const ExpansionQuery& query);

/// Common interface of the expansion backends. Implementations are
/// immutable after construction and safe to share across threads.
class Expander {
 public:
  virtual ~Expander() = default;
  /// `seed` drives every random choice the backend makes for this query.
  virtual ExpansionResult expand(const ExpansionQuery& query, std::uint64_t seed) const = 0;
};

/// Extracts the expansion text from a raw completion. Accepts a
/// brace-delimited `{...}` completion or a bare line; the first line wins.
std::string parse_sample(std::string_view raw);

/// Exact match (noisy == false) or equal-length nearby-key match.
bool matches_abbreviation(const KeyboardLayout& layout, std::string_view query_abbrev,
                          std::string_view candidate_phrase, bool noisy);

/// Normalizes and de-duplicates samples, keeps those whose abbreviation
/// matches the query, and returns the top k by count (ties keep first
/// occurrence order).
ExpansionResult filter_and_rank(const std::vector<std::string>& samples, const ExpansionQuery& query,
                                const KeyboardLayout& layout = KeyboardLayout::standard());

}  // namespace ae
