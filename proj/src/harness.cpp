#include "ae/harness.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "ae/lut.hpp"
#include "ae/ngram.hpp"
#include "ae/noise.hpp"

namespace ae {

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.train_path = j.value("train", "");
  c.test_path = j.value("test", "");
  c.backend = j.value("backend", c.backend);
  c.context_mode = parse_context_mode(j.value("context_mode", std::string("full")));
  c.sigma = j.value("sigma", c.sigma);
  c.k = j.value("k", c.k);
  c.max_abbrev_len = j.value("max_abbrev_len", c.max_abbrev_len);
  c.runs = j.value("runs", c.runs);
  c.seed = j.value("seed", c.seed);
  c.max_turn = j.value("max_turn", c.max_turn);
  c.threads = j.value("threads", c.threads);
  if (j.contains("bins")) {
    c.bins.clear();
    for (const auto& b : j["bins"]) c.bins.push_back({b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>()});
  }
  const auto red = j.value("bleu_reduction", std::string("max_over_options"));
  if (red == "rank1")
    c.bleu_reduction = BleuReduction::rank1;
  else if (red != "max_over_options")
    throw std::invalid_argument("unknown bleu_reduction: " + red);
  c.ngram_order = j.value("ngram_order", c.ngram_order);
  c.beam_width = j.value("beam_width", c.beam_width);
  if (j.contains("sampling")) c.sampling = j["sampling"].get<SamplingConfig>();
  c.prompt_mode = parse_prompt_mode(j.value("prompt_mode", std::string("no_instr")));
  c.endpoint_config = j.value("endpoint_config", "");
  if (c.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (c.k < 1) throw std::invalid_argument("k must be >= 1");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return from_json(nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true));
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json bins_j = nlohmann::json::array();
  for (const auto& b : bins) bins_j.push_back({b.lo, b.hi});
  return {{"train", train_path},
          {"test", test_path},
          {"backend", backend},
          {"context_mode", std::string(to_string(context_mode))},
          {"sigma", sigma},
          {"k", k},
          {"max_abbrev_len", max_abbrev_len},
          {"runs", runs},
          {"seed", seed},
          {"max_turn", max_turn},
          {"bins", bins_j},
          {"bleu_reduction", bleu_reduction == BleuReduction::rank1 ? "rank1" : "max_over_options"},
          {"ngram_order", ngram_order},
          {"beam_width", beam_width},
          {"sampling", sampling},
          {"prompt_mode", std::string(to_string(prompt_mode))}};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view component, std::uint64_t item) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the component name
  for (unsigned char c : component) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(splitmix64(run_seed ^ h) + item);
}

std::unique_ptr<Expander> make_backend(const ExperimentConfig& config, const std::vector<AEExample>& train) {
  if (config.backend == "lut") return std::make_unique<LutExpander>(build_lut(train));
  if (config.backend == "ngram")
    return std::make_unique<NgramExpander>(NgramModel::train(train, config.ngram_order), config.beam_width);
  if (config.backend == "remote") {
    auto endpoint = config.endpoint_config.empty() ? EndpointConfig::from_env()
                                                   : EndpointConfig::from_file(config.endpoint_config);
    PromptSpec spec;
    spec.mode = config.prompt_mode;
    if (spec.mode == PromptMode::few_shot) {
      if (train.size() < kFewShotCount) throw std::invalid_argument("few_shot needs 4 training examples");
      spec.shots.assign(train.begin(), train.begin() + kFewShotCount);
    }
    return std::make_unique<RemoteExpander>(std::make_shared<RemoteClient>(std::move(endpoint)), spec,
                                            config.sampling);
  }
  throw std::invalid_argument("unknown backend: " + config.backend);
}

std::vector<AEExample> filter_by_length(const std::vector<AEExample>& examples, std::size_t max_len) {
  std::vector<AEExample> out;
  std::copy_if(examples.begin(), examples.end(), std::back_inserter(out),
               [&](const AEExample& e) { return e.abbrev_len() >= 1 && e.abbrev_len() <= max_len; });
  return out;
}

std::vector<EvalRecord> evaluate_run(const ExperimentConfig& config, const std::vector<AEExample>& test,
                                     const Expander& backend, int run) {
  const std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(run);
  const auto& layout = KeyboardLayout::standard();
  std::vector<EvalRecord> records(test.size());

  auto evaluate_one = [&](std::size_t i) {
    const auto& ex = test[i];
    ExpansionQuery q;
    q.context = select_context(ex.context, config.context_mode);
    q.k = config.k;
    q.noisy = config.sigma > 0.0;
    if (q.noisy) {
      NoiseModel noise(config.sigma, derive_seed(run_seed, "noise", i));
      q.abbreviation = simulate_typed_abbreviation(layout, noise, ex.shorthand);
    } else {
      q.abbreviation = ex.shorthand;
    }
    const auto result = backend.expand(q, derive_seed(run_seed, "tiebreak", i));
    EvalRecord& r = records[i];
    r.abbreviation = q.abbreviation;
    r.ground_truth = ex.full.normalized;
    r.turn_index = ex.turn_index;
    for (const auto& o : result.options) r.options.push_back(o.phrase);
  };

  const auto threads = static_cast<std::size_t>(std::max(1, config.threads));
  if (threads == 1 || test.size() < 2) {
    for (std::size_t i = 0; i < test.size(); ++i) evaluate_one(i);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mu;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < test.size(); i += threads) evaluate_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return records;
}

MetricsReport run_experiment(const ExperimentConfig& config, const std::vector<AEExample>& test_all,
                             const Expander& backend) {
  const auto test = filter_by_length(test_all, config.max_abbrev_len);
  if (test.empty()) throw std::invalid_argument("no examples within max_abbrev_len");

  std::vector<SliceMetrics> overall;
  std::map<std::string, std::vector<SliceMetrics>> bins;
  std::map<int, std::vector<SliceMetrics>> turns;
  for (int run = 0; run < config.runs; ++run) {
    const auto records = evaluate_run(config, test, backend, run);
    overall.push_back(compute_slice(records, config.bleu_reduction));
    for (const auto& bin : config.bins) {
      std::vector<EvalRecord> slice;
      for (std::size_t i = 0; i < records.size(); ++i)
        if (bin.contains(test[i].abbrev_len())) slice.push_back(records[i]);
      bins[bin.label()].push_back(compute_slice(slice, config.bleu_reduction));
    }
    std::map<int, std::vector<EvalRecord>> by_turn;
    for (const auto& r : records)
      if (r.turn_index >= 1 && r.turn_index <= config.max_turn) by_turn[r.turn_index].push_back(r);
    for (const auto& [turn, slice] : by_turn) turns[turn].push_back(compute_slice(slice, config.bleu_reduction));
  }

  MetricsReport report;
  report.runs = static_cast<std::size_t>(config.runs);
  report.overall = summarize(overall);
  for (const auto& [label, runs] : bins) report.per_bin[label] = summarize(runs);
  for (const auto& [turn, runs] : turns) report.per_turn[turn] = summarize(runs);
  report.metadata = {{"config", config.to_json()},
                     {"examples_total", test_all.size()},
                     {"examples_evaluated", test.size()},
                     {"metrics",
                      {{"bleu", "sentence BLEU, 1-4 grams, effective order, zero-match epsilon 0.1"},
                       {"bleu_reduction", config.bleu_reduction == BleuReduction::rank1 ? "rank1"
                                                                                          : "max_over_options"},
                       {"ksr_length_unit", "unicode code points"},
                       {"sd", "sample standard deviation over runs"}}}};
  return report;
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  const auto test = read_examples_file(config.test_path);
  const auto train = config.train_path.empty() ? std::vector<AEExample>{} : read_examples_file(config.train_path);
  const auto backend = make_backend(config, train);
  return run_experiment(config, test, *backend);
}

std::vector<PromptSpec> few_shot_windows(const std::vector<Dialog>& dialogs, int shot_turn) {
  if (dialogs.size() < kFewShotCount) throw std::invalid_argument("few_shot_windows: need at least 4 dialogs");
  std::vector<AEExample> shots;
  shots.reserve(dialogs.size());
  for (const auto& d : dialogs) {
    auto exs = dialog_to_examples(d, ContextMode::full);
    if (exs.empty()) throw std::invalid_argument("few_shot_windows: dialog " + d.id + " yields no example");
    auto it = std::find_if(exs.begin(), exs.end(), [&](const auto& e) { return e.turn_index == shot_turn; });
    shots.push_back(it != exs.end() ? *it : exs.back());
  }
  std::vector<PromptSpec> out;
  for (std::size_t i = 0; i + kFewShotCount <= shots.size(); ++i) {
    PromptSpec spec;
    spec.mode = PromptMode::few_shot;
    spec.shots.assign(shots.begin() + static_cast<std::ptrdiff_t>(i),
                      shots.begin() + static_cast<std::ptrdiff_t>(i + kFewShotCount));
    out.push_back(std::move(spec));
  }
  return out;
}

SweepResult prompt_variance_sweep(const std::vector<PromptSpec>& windows, const std::vector<AEExample>& eval_set,
                                  const PromptedExpand& expand, const ExperimentConfig& config) {
  SweepResult out;
  if (windows.empty()) return out;
  const auto test = filter_by_length(eval_set, config.max_abbrev_len);
  if (test.empty()) throw std::invalid_argument("prompt_variance_sweep: empty evaluation set");
  for (std::size_t w = 0; w < windows.size(); ++w) {
    std::vector<EvalRecord> records;
    for (std::size_t i = 0; i < test.size(); ++i) {
      ExpansionQuery q;
      q.context = select_context(test[i].context, config.context_mode);
      q.abbreviation = test[i].shorthand;
      q.k = config.k;
      const auto res = expand(windows[w], q, derive_seed(config.seed, "tiebreak", i));
      EvalRecord r{q.abbreviation, test[i].full.normalized, {}, test[i].turn_index};
      for (const auto& o : res.options) r.options.push_back(o.phrase);
      records.push_back(std::move(r));
    }
    out.accuracy.push_back(accuracy_at_k(records));
    if (out.accuracy.back() > out.accuracy[out.best]) out.best = w;
  }
  out.stats = mean_sd(out.accuracy);
  return out;
}

}  // namespace ae
