// aecli: command-line front end for the abbreviation expansion toolkit.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <httplib.h>

#include "ae/abbrev.hpp"
#include "ae/dialog.hpp"
#include "ae/harness.hpp"
#include "ae/lut.hpp"
#include "ae/ngram.hpp"
#include "ae/noise.hpp"
#include "ae/service.hpp"

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

/// Everything needed to build a backend outside an experiment config.
struct BackendOptions {
  std::string train;  // AEExample JSONL
  std::string lut;    // saved LUT (abbrev<TAB>phrase<TAB>count)
  std::string endpoint;
  std::string prompt_mode = "no_instr";
  int order = 3;
  int beam = 64;
  int num_samples = 128;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--train", train, "training examples (JSONL) for lut/ngram");
    cmd->add_option("--lut", lut, "saved look-up table for the lut backend");
    cmd->add_option("--endpoint", endpoint, "endpoint JSON for the remote backend (else environment)");
    cmd->add_option("--prompt-mode", prompt_mode, "remote prompt: no_instr, zero_shot, few_shot")
        ->check(CLI::IsMember({"no_instr", "zero_shot", "few_shot"}));
    cmd->add_option("--order", order, "n-gram order")->check(CLI::PositiveNumber);
    cmd->add_option("--beam", beam, "n-gram beam width")->check(CLI::PositiveNumber);
    cmd->add_option("--num-samples", num_samples, "remote samples per query")->check(CLI::PositiveNumber);
  }

  std::shared_ptr<const ae::Expander> build(const std::string& backend) const {
    if (backend == "lut" && !lut.empty()) {
      std::ifstream in(lut);
      if (!in) throw std::runtime_error("cannot open " + lut);
      return std::make_shared<ae::LutExpander>(ae::LookUpTable::load(in));
    }
    ae::ExperimentConfig c;
    c.backend = backend;
    c.ngram_order = order;
    c.beam_width = beam;
    c.endpoint_config = endpoint;
    c.prompt_mode = ae::parse_prompt_mode(prompt_mode);
    c.sampling.num_samples = num_samples;
    if (backend != "remote" && train.empty())
      throw std::invalid_argument(backend + " backend needs --train" + (backend == "lut" ? " or --lut" : ""));
    const auto examples = train.empty() ? std::vector<ae::AEExample>{} : ae::read_examples_file(train);
    return ae::make_backend(c, examples);
  }
};

int cmd_abbrev(const std::vector<std::string>& phrases) {
  auto emit = [](const std::string& line) {
    const auto p = ae::normalize_phrase(line);
    std::cout << p.normalized << '\t' << ae::abbreviate(p) << '\n';
  };
  if (!phrases.empty()) {
    for (const auto& p : phrases) emit(p);
  } else {
    for (std::string line; std::getline(std::cin, line);) emit(line);
  }
  return 0;
}

int cmd_convert(const std::string& input, const std::string& format, const std::string& mode,
                const std::string& out_path) {
  const auto dialogs = ae::read_dialogs_file(input, format);
  std::vector<ae::AEExample> examples;
  std::size_t dropped = 0;
  for (const auto& d : dialogs) {
    std::size_t n = 0;
    for (auto& ex : ae::dialog_to_examples(d, ae::parse_context_mode(mode), &n)) examples.push_back(std::move(ex));
    dropped += n;
  }
  auto out = open_out(out_path);
  ae::write_examples_jsonl(out, examples);
  std::cerr << dialogs.size() << " dialogs -> " << examples.size() << " examples (" << dropped
            << " turns without an abbreviation dropped)\n";
  return 0;
}

int cmd_dedup(const std::string& train_path, const std::string& test_path, const std::string& format,
              const std::string& out_path) {
  const auto train = ae::read_dialogs_file(train_path, format);
  const auto test = ae::read_dialogs_file(test_path, format);
  std::vector<std::string> removed;
  const auto kept = ae::dedup_split(test, train, &removed);
  auto out = open_out(out_path);
  out << "removed_id\n";
  for (const auto& id : removed) out << id << '\n';
  std::cerr << test.size() << " test dialogs, " << removed.size() << " removed, " << kept.size() << " kept\n";
  return 0;
}

int cmd_noise(const std::string& input, const std::string& out_path, double sigma, std::uint64_t seed) {
  auto examples = ae::read_examples_file(input);
  const auto& layout = ae::KeyboardLayout::standard();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ae::NoiseModel noise(sigma, ae::derive_seed(seed, "noise", i));
    examples[i].shorthand = ae::simulate_typed_abbreviation(layout, noise, examples[i].shorthand);
    examples[i].noise_sigma = sigma;
  }
  auto out = open_out(out_path.empty() ? input : out_path);
  ae::write_examples_jsonl(out, examples);
  return 0;
}

int cmd_calibrate(double sigma, std::size_t draws, const std::string& letters, const std::string& examples,
                  std::uint64_t seed) {
  std::vector<ae::Abbreviation> corpus{letters};
  if (!examples.empty()) {
    corpus.clear();
    for (const auto& ex : ae::read_examples_file(examples)) corpus.push_back(ex.shorthand);
  }
  const double cer = ae::estimate_cer(ae::KeyboardLayout::standard(), sigma, corpus, draws, seed);
  std::cout << nlohmann::json{{"sigma", sigma}, {"draws", draws}, {"cer", cer}}.dump() << '\n';
  return 0;
}

int cmd_expand(const std::string& backend, const BackendOptions& opts, const std::vector<std::string>& context,
               const std::string& abbrev, bool noisy, int k, std::uint64_t seed) {
  const auto expander = opts.build(backend);
  ae::ExpansionQuery q;
  q.context = context;
  q.abbreviation = abbrev;
  q.noisy = noisy;
  q.k = k;
  const auto r = expander->expand(q, seed);
  nlohmann::json options = nlohmann::json::array();
  for (const auto& o : r.options) options.push_back({{"phrase", o.phrase}, {"count", o.count}, {"score", o.score}});
  std::cout << nlohmann::json{{"options", options}, {"raw_sample_count", r.raw_sample_count}}.dump(2) << '\n';
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& json_out, const std::string& csv_out) {
  const auto config = ae::ExperimentConfig::from_file(config_path);
  const auto report = ae::run_experiment(config);
  const auto j = ae::to_json(report).dump(2);
  if (json_out.empty()) {
    std::cout << j << '\n';
  } else {
    open_out(json_out) << j << '\n';
  }
  if (!csv_out.empty()) open_out(csv_out) << ae::to_csv(report);
  return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::vector<std::string>& backends, const BackendOptions& opts,
              const std::string& journal, const std::string& cors, std::uint64_t seed) {
  ae::SessionStore::BackendMap map;
  for (const auto& b : backends) map[b] = opts.build(b);
  ae::SessionStore::Options so;
  if (!journal.empty()) so.journal_dir = journal;
  so.seed = seed;
  ae::SessionStore store(std::move(map), so);
  if (const auto n = store.recover()) std::cerr << "recovered " << n << " sessions\n";

  httplib::Server server;
  ae::register_routes(server, store, backends.front(), cors);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abbreviation expansion toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> phrases;
  auto* abbrev = app.add_subcommand("abbrev", "print `normalized<TAB>abbreviation` per phrase (stdin if none given)");
  abbrev->add_option("phrases", phrases);

  std::string input, out, format = "jsonl", context_mode = "full";
  auto* convert = app.add_subcommand("convert", "dialogs -> AEExample JSONL");
  convert->add_option("--input", input)->required();
  convert->add_option("--format", format)->check(CLI::IsMember({"jsonl", "tdc-txt"}));
  convert->add_option("--context", context_mode)->check(CLI::IsMember({"full", "previous_1", "none"}));
  convert->add_option("--out", out)->required();

  std::string train, test;
  auto* dedup = app.add_subcommand("dedup", "drop test dialogs duplicating a train dialog; CSV of removed ids");
  dedup->add_option("--train", train)->required();
  dedup->add_option("--test", test)->required();
  dedup->add_option("--format", format)->check(CLI::IsMember({"jsonl", "tdc-txt"}));
  dedup->add_option("--out", out)->required();

  double sigma = 0.0;
  std::uint64_t seed = 0;
  auto* noise = app.add_subcommand("noise", "perturb the shorthand of AEExample JSONL (in place unless --out)");
  noise->add_option("--sigma", sigma)->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", seed);
  noise->add_option("--input", input);
  noise->add_option("--out", out);
  std::size_t draws = 1000000;
  std::string corpus = "abcdefghijklmnopqrstuvwxyz";
  auto* calibrate = noise->add_subcommand("calibrate", "estimate the character error rate for a sigma");
  calibrate->add_option("--sigma", sigma)->check(CLI::NonNegativeNumber);
  calibrate->add_option("--draws", draws)->check(CLI::PositiveNumber);
  calibrate->add_option("--corpus", corpus, "characters typed in turn");
  calibrate->add_option("--examples", input, "type the shorthands of this AEExample JSONL instead");
  calibrate->add_option("--seed", seed);

  std::string backend = "lut", abbreviation;
  std::vector<std::string> context;
  bool noisy = false;
  int k = 5;
  BackendOptions bopts;
  auto* expand = app.add_subcommand("expand", "expand one abbreviation");
  expand->add_option("--backend", backend)->check(CLI::IsMember({"lut", "ngram", "remote"}));
  expand->add_option("--context", context, "earlier turn, oldest first (repeatable)");
  expand->add_option("--abbrev", abbreviation)->required();
  expand->add_flag("--noisy", noisy);
  expand->add_option("-k", k)->check(CLI::PositiveNumber);
  expand->add_option("--seed", seed);
  bopts.add_to(expand);

  std::string config, json_out, csv_out;
  auto* eval = app.add_subcommand("eval", "run an experiment config");
  eval->add_option("--config", config)->required();
  eval->add_option("--json", json_out, "report path (default stdout)");
  eval->add_option("--csv", csv_out, "table path");

  std::string lut_out;
  auto* lut = app.add_subcommand("lut", "build and save a look-up table");
  lut->add_option("--train", train)->required();
  lut->add_option("--out", lut_out)->required();

  std::string host = "127.0.0.1", journal, cors = "*";
  int port = 8080;
  std::vector<std::string> backends{"lut"};
  auto* serve = app.add_subcommand("serve", "HTTP session service");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--backend", backends, "backend id(s); the first is the default")
      ->check(CLI::IsMember({"lut", "ngram", "remote"}));
  serve->add_option("--journal", journal, "directory for session journals");
  serve->add_option("--cors-origin", cors);
  serve->add_option("--seed", seed);
  bopts.add_to(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*abbrev) return cmd_abbrev(phrases);
    if (*convert) return cmd_convert(input, format, context_mode, out);
    if (*dedup) return cmd_dedup(train, test, format, out);
    if (*calibrate) return cmd_calibrate(sigma, draws, corpus, input, seed);
    if (*noise) {
      if (input.empty()) throw std::invalid_argument("noise needs --input (or the calibrate subcommand)");
      return cmd_noise(input, out, sigma, seed);
    }
    if (*expand) return cmd_expand(backend, bopts, context, abbreviation, noisy, k, seed);
    if (*eval) return cmd_eval(config, json_out, csv_out);
    if (*lut) {
      const auto table = ae::build_lut(ae::read_examples_file(train));
      auto o = open_out(lut_out);
      table.save(o);
      std::cerr << table.abbreviation_count() << " abbreviations, " << table.total_pairs() << " pairs\n";
      return 0;
    }
    if (*serve) return cmd_serve(host, port, backends, bopts, journal, cors, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
