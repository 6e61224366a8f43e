#include "ae/expander.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace ae {

void validate(const ExpansionQuery& query) {
  if (query.k < 1) throw std::invalid_argument("k must be >= 1");
  if (query.abbreviation.empty()) throw std::invalid_argument("abbreviation must not be empty");
}

std::string parse_sample(std::string_view raw) {
  auto open = raw.find('{');
  std::string_view body = raw;
  if (open != std::string_view::npos && raw.substr(0, open).find_first_not_of(" \t\r\n") == std::string_view::npos)
    body = raw.substr(open + 1);
  const auto close = body.find('}');
  if (close != std::string_view::npos) body = body.substr(0, close);
  const auto b = body.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  body = body.substr(b);
  const auto nl = body.find('\n');
  if (nl != std::string_view::npos) body = body.substr(0, nl);
  return std::string(body);
}

bool matches_abbreviation(const KeyboardLayout& layout, std::string_view query_abbrev,
                          std::string_view candidate_phrase, bool noisy) {
  const auto cand = abbreviate(normalize_phrase(candidate_phrase));
  if (!noisy) return cand == query_abbrev;
  return abbreviations_match_nearby(layout, query_abbrev, cand);
}

ExpansionResult filter_and_rank(const std::vector<std::string>& samples, const ExpansionQuery& query,
                                const KeyboardLayout& layout) {
  ExpansionResult result;
  result.raw_sample_count = static_cast<int>(samples.size());

  std::vector<ExpansionOption> grouped;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& s : samples) {
    auto phrase = normalize_phrase(parse_sample(s)).normalized;
    if (phrase.empty()) continue;
    auto [it, inserted] = index.try_emplace(phrase, grouped.size());
    if (inserted)
      grouped.push_back({std::move(phrase), 1, 0.0});
    else
      ++grouped[it->second].count;
  }

  for (auto& opt : grouped) {
    const auto abbr = abbreviate(Phrase{opt.phrase, opt.phrase});
    const bool ok = query.noisy ? abbreviations_match_nearby(layout, query.abbreviation, abbr)
                                : abbr == query.abbreviation;
    if (ok) result.options.push_back(std::move(opt));
  }
  std::stable_sort(result.options.begin(), result.options.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  if (result.options.size() > static_cast<std::size_t>(std::max(query.k, 0)))
    result.options.resize(static_cast<std::size_t>(std::max(query.k, 0)));
  return result;
}

}  // namespace ae
