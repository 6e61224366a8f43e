#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ae {

/// One scored query. `options` are normalized phrases in rank order.
struct EvalRecord {
  std::string abbreviation;   ///< as typed (noisy when noise is on)
  std::string ground_truth;   ///< normalized
  std::vector<std::string> options;
  int turn_index = 0;

  bool matched() const;
};

double accuracy_at_k(const std::vector<EvalRecord>& records);

/// Smoothing constant added to zero n-gram match counts in sentence_bleu.
inline constexpr double kBleuEpsilon = 0.1;

/// Sentence BLEU on whitespace tokens: clipped 1..4-gram precisions (orders
/// the candidate is too short for are skipped), geometric mean, brevity
/// penalty exp(1 - r/c) for c < r, zero match counts replaced by 0.1.
/// Throws std::invalid_argument for an empty reference.
double sentence_bleu(std::string_view candidate, std::string_view reference);

enum class BleuReduction { max_over_options, rank1 };

double bleu_at_k(const std::vector<EvalRecord>& records,
                 BleuReduction reduction = BleuReduction::max_over_options);

struct KsrResult {
  double ksr_all = 0.0;
  std::optional<double> ksr_success;  ///< absent when nothing matched
  std::size_t matched = 0;
  std::size_t excluded = 0;  ///< records with an empty ground truth
};

/// Per-record keystroke saving: (1 - La/Lf) x 100 when matched, and
/// (1 - (La + Lf)/Lf) x 100 otherwise; lengths in code points.
double record_ksr(std::size_t abbrev_len, std::size_t full_len, bool matched);

KsrResult ksr(const std::vector<EvalRecord>& records);

struct SliceMetrics {
  std::size_t n = 0;
  double acc_at_k = 0.0;
  double bleu_at_k = 0.0;
  double ksr_all = 0.0;
  std::optional<double> ksr_success;
};

/// All four metrics over one slice. Empty slices yield n == 0 and zeros.
SliceMetrics compute_slice(const std::vector<EvalRecord>& records,
                           BleuReduction reduction = BleuReduction::max_over_options);

struct LengthBin {
  std::size_t lo = 1;
  std::size_t hi = 2;
  std::string label() const { return std::to_string(lo) + "-" + std::to_string(hi); }
  bool contains(std::size_t len) const { return len >= lo && len <= hi; }
};

std::vector<LengthBin> default_length_bins();

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  ///< sample SD; 0 for a single run
};

MeanSd mean_sd(const std::vector<double>& values);

struct SliceSummary {
  std::size_t n = 0;
  MeanSd acc_at_k, bleu_at_k, ksr_all, ksr_success;
};

SliceSummary summarize(const std::vector<SliceMetrics>& runs);

struct MetricsReport {
  SliceSummary overall;
  std::map<std::string, SliceSummary> per_bin;  ///< keyed by LengthBin::label()
  std::map<int, SliceSummary> per_turn;
  std::size_t runs = 0;
  nlohmann::json metadata;  ///< config echo, metric conventions
};

nlohmann::json to_json(const MetricsReport& report);
/// `slice,n,acc_at_k,acc_sd,bleu_at_k,bleu_sd,ksr_all,ksr_all_sd,ksr_success,ksr_success_sd`
std::string to_csv(const MetricsReport& report);

}  // namespace ae
