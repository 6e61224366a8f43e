#include "ae/lut.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ae {

void LookUpTable::add(std::string_view phrase, std::int64_t count) {
  if (count < 1) throw std::invalid_argument("LookUpTable::add: count must be >= 1");
  auto p = normalize_phrase(phrase);
  if (p.normalized.empty()) return;
  auto abbr = abbreviate(p);
  if (abbr.empty()) return;
  auto& list = map_[abbr];
  auto it = std::find_if(list.begin(), list.end(),
                         [&](const PhraseFrequency& f) { return f.phrase == p.normalized; });
  if (it != list.end()) {
    it->frequency += count;
  } else {
    list.push_back({std::move(p.normalized), count});
    ++pairs_;
  }
}

const std::vector<PhraseFrequency>* LookUpTable::find(const Abbreviation& abbrev) const {
  auto it = map_.find(abbrev);
  return it == map_.end() ? nullptr : &it->second;
}

void LookUpTable::save(std::ostream& out) const {
  for (const auto& [abbr, list] : map_) {
    auto sorted = list;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.phrase < b.phrase; });
    for (const auto& f : sorted) out << abbr << '\t' << f.phrase << '\t' << f.frequency << '\n';
  }
}

LookUpTable LookUpTable::load(std::istream& in) {
  LookUpTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::runtime_error("malformed LUT line " + std::to_string(lineno));
    const auto phrase = line.substr(t1 + 1, t2 - t1 - 1);
    const auto count = std::stoll(line.substr(t2 + 1));
    t.add(phrase, count);
  }
  return t;
}

LookUpTable build_lut(const std::vector<AEExample>& examples) {
  LookUpTable t;
  for (const auto& ex : examples) t.add(ex.full.normalized);
  return t;
}

ExpansionResult lut_expand(const LookUpTable& table, const ExpansionQuery& query, std::uint64_t seed,
                           const KeyboardLayout& layout) {
  validate(query);
  std::vector<PhraseFrequency> pool;
  if (!query.noisy) {
    if (const auto* list = table.find(query.abbreviation)) pool = *list;
  } else {
    for (const auto& [abbr, list] : table.entries())
      if (abbreviations_match_nearby(layout, query.abbreviation, abbr))
        pool.insert(pool.end(), list.begin(), list.end());
  }

  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.frequency > b.frequency; });
  if (pool.size() > static_cast<std::size_t>(query.k)) pool.resize(static_cast<std::size_t>(query.k));

  ExpansionResult r;
  for (auto& f : pool) r.options.push_back({std::move(f.phrase), static_cast<int>(f.frequency), 0.0});
  return r;
}

}  // namespace ae
