#include "ae/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ae/text.hpp"

namespace ae {

std::size_t NgramModel::VecHash::operator()(const std::vector<WordId>& v) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (auto w : v) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

NgramModel::NgramModel(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  levels_.resize(static_cast<std::size_t>(order));
  intern(std::string(kUnk));
  intern(std::string(kBos));
  intern(std::string(kEos));
  intern(std::string(kTurn));
  for (auto w : {id(kUnk), id(kEos)}) {
    is_predictable_[w] = true;
    predictable_.push_back(w);
  }
}

NgramModel::WordId NgramModel::intern(const std::string& word) {
  auto [it, inserted] = ids_.try_emplace(word, static_cast<WordId>(words_.size()));
  if (inserted) {
    words_.push_back(word);
    is_predictable_.push_back(false);
    unigram_.push_back(0.0);
    const bool marker = word == kUnk || word == kBos || word == kEos || word == kTurn;
    if (!marker) {
      auto abbr = word_abbreviation(word);
      if (!abbr.empty()) by_abbrev_[abbr].push_back(it->second);
    }
  }
  return it->second;
}

NgramModel::WordId NgramModel::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? ids_.at(std::string(kUnk)) : it->second;
}

void NgramModel::observe(std::span<const WordId> history, WordId word, double count) {
  if (!is_predictable_[word]) {
    is_predictable_[word] = true;
    predictable_.push_back(word);
  }
  unigram_[word] += count;
  unigram_total_ += count;
  const auto max_m = std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), history.size());
  for (std::size_t m = 1; m <= max_m; ++m) {
    std::vector<WordId> h(history.end() - static_cast<std::ptrdiff_t>(m), history.end());
    auto& stats = levels_[m][h];
    stats.total += count;
    stats.next[word] += count;
  }
}

void NgramModel::add_sequence(std::span<const std::string> tokens) {
  std::vector<WordId> seq{id(kBos)};
  for (const auto& t : tokens) {
    const WordId w = intern(t);
    observe(seq, w, 1.0);
    seq.push_back(w);
  }
}

void NgramModel::add_count(std::span<const std::string> history, const std::string& word, double count) {
  if (!(count > 0)) throw std::invalid_argument("add_count: count must be positive");
  std::vector<WordId> h;
  for (const auto& t : history) h.push_back(intern(t));
  observe(h, intern(word), count);
}

double NgramModel::log_prob(WordId word, std::span<const WordId> history) const {
  if (word >= words_.size() || !is_predictable_[word]) word = id(kUnk);
  const double vocab = static_cast<double>(predictable_.size());
  double p = (unigram_[word] + 1.0) / (unigram_total_ + vocab);
  const auto max_m = std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), history.size());
  std::vector<WordId> h;
  for (std::size_t m = 1; m <= max_m; ++m) {
    h.assign(history.end() - static_cast<std::ptrdiff_t>(m), history.end());
    auto it = levels_[m].find(h);
    if (it == levels_[m].end()) break;
    const auto& st = it->second;
    const double types = static_cast<double>(st.next.size());
    auto c = st.next.find(word);
    const double cw = c == st.next.end() ? 0.0 : c->second;
    p = (cw + types * p) / (st.total + types);
  }
  return std::log(p);
}

double NgramModel::log_prob(std::string_view word, std::span<const std::string> history) const {
  std::vector<WordId> h;
  for (const auto& t : history) h.push_back(id(t));
  return log_prob(id(word), h);
}

std::vector<std::string> NgramModel::example_tokens(const AEExample& ex) {
  std::vector<std::string> tokens;
  if (!ex.context.empty()) tokens = text::split_words(normalize_phrase(ex.context.back()).normalized);
  tokens.emplace_back(kTurn);
  for (auto& w : text::split_words(ex.full.normalized)) tokens.push_back(std::move(w));
  tokens.emplace_back(kEos);
  return tokens;
}

std::vector<NgramModel::WordId> NgramModel::history_for(const std::vector<std::string>& context) const {
  std::vector<WordId> h{id(kBos)};
  if (!context.empty())
    for (const auto& w : text::split_words(normalize_phrase(context.back()).normalized)) h.push_back(id(w));
  h.push_back(id(kTurn));
  return h;
}

NgramModel NgramModel::train(const std::vector<AEExample>& examples, int order) {
  NgramModel m(order);
  for (const auto& ex : examples) {
    auto toks = example_tokens(ex);
    m.add_sequence(toks);
  }
  return m;
}

namespace {

using WordId = NgramModel::WordId;
using State = std::vector<WordId>;

struct Hyp {
  std::vector<WordId> words;
  double score = 0.0;
};

bool better(const Hyp& a, const Hyp& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.words < b.words;
}

void insert_kbest(std::vector<Hyp>& list, Hyp h, std::size_t k) {
  auto pos = std::upper_bound(list.begin(), list.end(), h, better);
  if (static_cast<std::size_t>(pos - list.begin()) >= k) return;
  list.insert(pos, std::move(h));
  if (list.size() > k) list.pop_back();
}

struct Candidate {
  WordId word;
  std::size_t length;  // abbreviation code points consumed
};

}  // namespace

ExpansionResult ngram_constrained_expand(const NgramModel& model, const ExpansionQuery& query,
                                         int beam_width, const KeyboardLayout& layout) {
  validate(query);
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  const auto target = text::decode(query.abbreviation);
  const std::size_t len = target.size();
  const auto k = static_cast<std::size_t>(query.k);
  const auto state_len = static_cast<std::size_t>(model.order() - 1);

  // Words that can start at each abbreviation position.
  std::vector<std::vector<Candidate>> fits(len);
  for (const auto& [abbr, words] : model.abbreviation_index()) {
    const auto a = text::decode(abbr);
    for (std::size_t p = 0; p + a.size() <= len; ++p) {
      bool ok = true;
      for (std::size_t i = 0; i < a.size() && ok; ++i) {
        const char32_t q = target[p + i];
        ok = a[i] == q || (query.noisy && chars_match_nearby(layout, q, a[i]));
      }
      if (ok)
        for (auto w : words)
          if (model.is_predictable(w)) fits[p].push_back({w, a.size()});
    }
  }

  auto trim_state = [&](State s) {
    if (s.size() > state_len) s.erase(s.begin(), s.end() - static_cast<std::ptrdiff_t>(state_len));
    return s;
  };

  std::vector<std::map<State, std::vector<Hyp>>> frontier(len + 1);
  frontier[0][trim_state(model.history_for(query.context))].push_back(Hyp{});

  for (std::size_t p = 0; p < len; ++p) {
    auto& states = frontier[p];
    if (states.empty() || fits[p].empty()) continue;
    if (states.size() > static_cast<std::size_t>(beam_width)) {
      std::vector<std::pair<const State*, const Hyp*>> order;
      for (const auto& [s, hyps] : states) order.emplace_back(&s, &hyps.front());
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& a, const auto& b) { return better(*a.second, *b.second); });
      std::map<State, std::vector<Hyp>> kept;
      for (std::size_t i = 0; i < static_cast<std::size_t>(beam_width); ++i)
        kept.emplace(*order[i].first, std::move(states[*order[i].first]));
      states = std::move(kept);
    }
    for (const auto& [state, hyps] : states) {
      for (const auto& c : fits[p]) {
        const double lp = model.log_prob(c.word, state);
        State next = state;
        next.push_back(c.word);
        next = trim_state(std::move(next));
        auto& dest = frontier[p + c.length][next];
        for (const auto& h : hyps) {
          Hyp n{h.words, h.score + lp};
          n.words.push_back(c.word);
          insert_kbest(dest, std::move(n), k);
        }
      }
    }
    states.clear();
  }

  std::vector<Hyp> finals;
  const WordId eos = model.id(NgramModel::kEos);
  for (const auto& [state, hyps] : frontier[len]) {
    const double lp = model.log_prob(eos, state);
    for (const auto& h : hyps) finals.push_back(Hyp{h.words, h.score + lp});
  }
  std::sort(finals.begin(), finals.end(), better);
  if (finals.size() > k) finals.resize(k);

  ExpansionResult r;
  for (const auto& h : finals) {
    std::vector<std::string> ws;
    for (auto w : h.words) ws.push_back(model.word(w));
    r.options.push_back({text::join(ws, " "), 1, h.score});
  }
  return r;
}

}  // namespace ae
