#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ae/dialog.hpp"
#include "ae/expander.hpp"

namespace ae {

struct PhraseFrequency {
  std::string phrase;  ///< normalized
  std::int64_t frequency = 0;

  friend bool operator==(const PhraseFrequency&, const PhraseFrequency&) = default;
};

/// Sentence-level abbreviation dictionary: abbreviation -> phrases seen
/// with it, with their frequencies.
class LookUpTable {
 public:
  /// Adds `count` occurrences of a phrase under its own abbreviation.
  void add(std::string_view phrase, std::int64_t count = 1);

  const std::vector<PhraseFrequency>* find(const Abbreviation& abbrev) const;
  const std::map<Abbreviation, std::vector<PhraseFrequency>>& entries() const { return map_; }

  std::size_t abbreviation_count() const { return map_.size(); }
  std::size_t total_pairs() const { return pairs_; }
  bool empty() const { return map_.empty(); }

  /// `abbrev<TAB>phrase<TAB>count` lines sorted by abbreviation then phrase.
  void save(std::ostream& out) const;
  static LookUpTable load(std::istream& in);

 private:
  std::map<Abbreviation, std::vector<PhraseFrequency>> map_;
  std::size_t pairs_ = 0;
};

LookUpTable build_lut(const std::vector<AEExample>& examples);

/// Top-k phrases by frequency; equal frequencies are ordered by a uniform
/// random permutation drawn from `seed`. Noisy queries gather every stored
/// abbreviation that matches under nearby-key matching.
ExpansionResult lut_expand(const LookUpTable& table, const ExpansionQuery& query, std::uint64_t seed,
                           const KeyboardLayout& layout = KeyboardLayout::standard());

class LutExpander final : public Expander {
 public:
  explicit LutExpander(LookUpTable table) : table_(std::move(table)) {}
  ExpansionResult expand(const ExpansionQuery& query, std::uint64_t seed) const override {
    return lut_expand(table_, query, seed);
  }
  const LookUpTable& table() const { return table_; }

 private:
  LookUpTable table_;
};

}  // namespace ae
