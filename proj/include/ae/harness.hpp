#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ae/dialog.hpp"
#include "ae/expander.hpp"
#include "ae/metrics.hpp"
#include "ae/prompt.hpp"
#include "ae/remote.hpp"

namespace ae {

struct ExperimentConfig {
  std::string train_path;  ///< AEExample JSONL (backend training data)
  std::string test_path;   ///< AEExample JSONL (evaluation data)
  std::string backend = "lut";  ///< lut | ngram | remote
  ContextMode context_mode = ContextMode::full;
  double sigma = 0.0;
  int k = 5;
  std::size_t max_abbrev_len = 10;
  int runs = 3;
  std::uint64_t seed = 0;
  int max_turn = 6;
  int threads = 1;
  std::vector<LengthBin> bins = default_length_bins();
  BleuReduction bleu_reduction = BleuReduction::max_over_options;

  int ngram_order = 3;
  int beam_width = 64;

  SamplingConfig sampling;
  PromptMode prompt_mode = PromptMode::no_instr;
  std::string endpoint_config;  ///< path to endpoint JSON; empty = environment

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

/// Independent 64-bit stream seed for (run seed, component, item).
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view component, std::uint64_t item);

/// Builds the configured backend; lut and ngram are trained on `train`.
std::unique_ptr<Expander> make_backend(const ExperimentConfig& config, const std::vector<AEExample>& train);

/// Examples whose clean abbreviation fits max_abbrev_len.
std::vector<AEExample> filter_by_length(const std::vector<AEExample>& examples, std::size_t max_len);

/// One pass over the test set with run seed `config.seed + run`.
std::vector<EvalRecord> evaluate_run(const ExperimentConfig& config, const std::vector<AEExample>& test,
                                     const Expander& backend, int run);

/// Repeats evaluate_run `config.runs` times and reports mean and SD overall,
/// per abbreviation-length bin and per turn index.
/// Throws std::invalid_argument when no example survives the length filter.
MetricsReport run_experiment(const ExperimentConfig& config, const std::vector<AEExample>& test,
                             const Expander& backend);
/// Loads train/test files and builds the backend from the config.
MetricsReport run_experiment(const ExperimentConfig& config);

/// Every window of 4 consecutive dialogs, each dialog contributing its
/// example at `shot_turn` (or its last example if shorter).
/// Throws std::invalid_argument with fewer than 4 dialogs.
std::vector<PromptSpec> few_shot_windows(const std::vector<Dialog>& train_dialogs, int shot_turn = 2);

using PromptedExpand = std::function<ExpansionResult(const PromptSpec&, const ExpansionQuery&, std::uint64_t)>;

struct SweepResult {
  std::vector<double> accuracy;  ///< per window
  MeanSd stats;
  std::size_t best = 0;  ///< argmax accuracy, lowest index on ties
};

SweepResult prompt_variance_sweep(const std::vector<PromptSpec>& windows, const std::vector<AEExample>& eval_set,
                                  const PromptedExpand& expand, const ExperimentConfig& config = {});

}  // namespace ae
