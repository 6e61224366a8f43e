#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ae/dialog.hpp"
#include "ae/expander.hpp"

namespace ae {

/// Word n-gram model with interpolated Witten-Bell smoothing over an
/// add-one unigram base, plus an index from word abbreviation to words for
/// abbreviation-constrained decoding.
///
/// Probabilities over the prediction vocabulary (every token seen in a
/// predicted position, plus <unk>) sum to one for any history.
class NgramModel {
 public:
  using WordId = std::uint32_t;

  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kTurn = "<t>";
  static constexpr std::string_view kUnk = "<unk>";

  explicit NgramModel(int order);

  int order() const { return order_; }

  /// Counts one training sequence. A leading <s> is implied; the caller
  /// supplies any </s>.
  void add_sequence(std::span<const std::string> tokens);
  void add_sequence(std::initializer_list<std::string> tokens) {
    std::vector<std::string> v(tokens);
    add_sequence(std::span<const std::string>(v));
  }

  /// Adds `count` to one n-gram observation directly (history may be shorter
  /// than order - 1). Intended for synthetic models and tests; the per-order
  /// counts stay consistent with add_sequence.
  void add_count(std::span<const std::string> history, const std::string& word, double count);

  WordId id(std::string_view word) const;  ///< <unk> id for unseen words
  const std::string& word(WordId id) const { return words_[id]; }

  /// Natural-log probability of `word` after `history` (only the last
  /// order - 1 tokens matter).
  double log_prob(WordId word, std::span<const WordId> history) const;
  double log_prob(std::string_view word, std::span<const std::string> history) const;

  /// Tokens that can be predicted, including </s> and <unk>.
  const std::vector<WordId>& prediction_vocabulary() const { return predictable_; }
  bool is_predictable(WordId w) const { return w < is_predictable_.size() && is_predictable_[w]; }

  /// Ordinary words (no markers) keyed by word_abbreviation, including
  /// words only ever seen as history.
  const std::unordered_map<Abbreviation, std::vector<WordId>>& abbreviation_index() const {
    return by_abbrev_;
  }

  /// Training sequence for one example: last context turn, <t>, target, </s>.
  static std::vector<std::string> example_tokens(const AEExample& ex);
  /// Decoding history for a query context: <s>, last context turn, <t>.
  std::vector<WordId> history_for(const std::vector<std::string>& context) const;

  static NgramModel train(const std::vector<AEExample>& examples, int order);

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<WordId>& v) const noexcept;
  };
  struct HistoryStats {
    double total = 0;
    std::unordered_map<WordId, double> next;
  };

  WordId intern(const std::string& word);
  void observe(std::span<const WordId> history, WordId word, double count);

  int order_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  std::vector<WordId> predictable_;
  std::vector<bool> is_predictable_;
  std::vector<double> unigram_;
  double unigram_total_ = 0;
  /// levels_[m] holds histories of length m (m >= 1).
  std::vector<std::unordered_map<std::vector<WordId>, HistoryStats, VecHash>> levels_;
  std::unordered_map<Abbreviation, std::vector<WordId>> by_abbrev_;
};

/// Beam search over word sequences whose concatenated word abbreviations
/// spell the query abbreviation (nearby-key matching when query.noisy).
///
/// Hypotheses that reach the same abbreviation position with the same
/// language-model state are recombined, keeping the k best; at most
/// `beam_width` states survive per position. Results carry count 1 and
/// the total log-probability (including </s>) in `score`.
ExpansionResult ngram_constrained_expand(const NgramModel& model, const ExpansionQuery& query,
                                         int beam_width,
                                         const KeyboardLayout& layout = KeyboardLayout::standard());

class NgramExpander final : public Expander {
 public:
  NgramExpander(NgramModel model, int beam_width) : model_(std::move(model)), beam_width_(beam_width) {}
  ExpansionResult expand(const ExpansionQuery& query, std::uint64_t) const override {
    return ngram_constrained_expand(model_, query, beam_width_);
  }
  const NgramModel& model() const { return model_; }

 private:
  NgramModel model_;
  int beam_width_;
};

}  // namespace ae
