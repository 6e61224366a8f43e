// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "ae/abbrev.hpp"
#include "ae/dialog.hpp"
#include "ae/harness.hpp"
#include "ae/lut.hpp"
#include "ae/metrics.hpp"
#include "ae/ngram.hpp"
#include "ae/noise.hpp"
#include "ae/remote.hpp"
#include "ngram_oracle.hpp"
#include "noise_oracle.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace ae;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

Outcome abbreviation_golden() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"would you like to sit down", "wyltsd"},
      {"no, i'm fine standing up", "n,imfsu"},
      {"it feels good to stretch my legs a bit", "ifgtsmlab"},
      {"can't", "ct"},
      {"see you at 10 o'clock", "sya10oc"},
      {"ok, but be quick", "o,bbq"}};
  int ok = 0;
  for (const auto& [phrase, abbr] : pairs) {
    const auto got = abbreviate_text(phrase);
    o.require(got == abbr, phrase + " -> " + got);
    ok += got == abbr;
  }
  o.note(std::to_string(ok) + "/6 exact");
  return o;
}

Outcome noise_calibration() {
  Outcome o;
  const auto& L = KeyboardLayout::standard();
  const std::vector<Abbreviation> letters = {"abcdefghijklmnopqrstuvwxyz"};
  const std::uint64_t draws = 1000000;
  const auto t0 = std::chrono::steady_clock::now();
  const double c0 = estimate_cer(L, 0.0, letters, draws, 1);
  const double c3 = estimate_cer(L, 0.3, letters, draws, 1);
  const double c5 = estimate_cer(L, 0.5, letters, draws, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(c0 == 0.0, "cer(0.0) == 0");
  o.require(std::abs(c3 - 0.13) <= 0.03, "cer(0.3) in 0.13+-0.03");
  o.require(std::abs(c5 - 0.44) <= 0.05, "cer(0.5) in 0.44+-0.05");
  o.require(secs < 60.0, "runtime < 60 s");
  o.note("cer(0)=" + fmt(c0) + " cer(0.3)=" + fmt(c3) + " cer(0.5)=" + fmt(c5) + " in " + fmt(secs, 2) + " s");
  return o;
}

Outcome per_cell_distribution() {
  Outcome o;
  const auto& L = KeyboardLayout::standard();
  const double sigma = 0.3;
  const int draws = 1000000;
  const auto key = *L.find(U'f');
  std::map<char32_t, int> hits;
  NoiseModel n(sigma, 20240601);
  for (int i = 0; i < draws; ++i) ++hits[n.press(L, U'f')];
  int within = 0;
  double worst = 0.0;
  for (const auto& k : L.keys()) {
    const double p = test::cell_probability(key, sigma, k.row, k.col);
    const double freq = static_cast<double>(hits[k.label]) / draws;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    const double dev = std::abs(freq - p);
    const bool ok = dev <= 3.0 * se;
    within += ok;
    if (se > 0) worst = std::max(worst, dev / se);
    o.require(ok, "cell '" + text::encode(k.label) + "' p=" + fmt(p, 8) + " freq=" + fmt(freq, 8));
  }
  o.note(std::to_string(within) + "/30 cells within 3 SE, max |z|=" + fmt(worst, 2));
  return o;
}

Outcome ksr_arithmetic() {
  Outcome o;
  const auto hit = EvalRecord{"wyltsd", "would you like to sit down", {"would you like to sit down"}, 1};
  const auto miss = EvalRecord{"wyltsd", "would you like to sit down", {}, 1};
  const double m = std::round(ksr({hit}).ksr_all * 100) / 100;
  const double u = std::round(ksr({miss}).ksr_all * 100) / 100;
  o.require(m == 76.92, "matched 76.92");
  o.require(u == -23.08, "unmatched -23.08");
  o.require(std::abs(record_ksr(6, 26, false) + 600.0 / 26) < 1e-12, "unmatched identity");

  std::mt19937_64 rng(9);
  int fixtures = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<EvalRecord> rs;
    bool any_miss = false, any_hit = false;
    for (int j = 0; j < 1 + static_cast<int>(rng() % 10); ++j) {
      const auto p = normalize_phrase(test::random_phrase(rng));
      const auto a = abbreviate(p);
      if (a.empty()) continue;
      const bool h = rng() % 2;
      any_hit |= h;
      any_miss |= !h;
      rs.push_back({a, p.normalized, h ? std::vector<std::string>{p.normalized} : std::vector<std::string>{}, 1});
    }
    if (!any_miss || !any_hit) continue;
    ++fixtures;
    const auto k = ksr(rs);
    o.require(*k.ksr_success >= k.ksr_all, "ksr_success >= ksr_all");
    if (!o.pass) break;
  }
  o.note("matched " + fmt(m, 2) + ", unmatched " + fmt(u, 2) + ", success>=all on " + std::to_string(fixtures) +
         " random fixtures");
  return o;
}

Outcome ksr_plausibility() {
  Outcome o;
  const auto dialogs = read_dialogs_file(test::data_path("chatterbot_english.tdc.txt"), "tdc-txt");
  const auto exs = test::examples_of(dialogs);
  const LutExpander lut(build_lut(exs));
  ExperimentConfig c;
  c.runs = 1;
  const auto report = run_experiment(c, exs, lut);
  const double s = report.overall.ksr_success.mean;
  o.require(s >= 70.0 && s <= 80.0, "ksr_success in [70, 80]");
  o.note(std::to_string(dialogs.size()) + " dialogs, " + std::to_string(report.overall.n) +
         " examples, acc=" + fmt(report.overall.acc_at_k.mean, 1) + " ksr_success=" + fmt(s, 2));
  return o;
}

Outcome filter_properties() {
  Outcome o;
  const auto& L = KeyboardLayout::standard();
  std::mt19937_64 rng(31337);
  int cases = 0;
  for (; cases < 10000 && o.pass; ++cases) {
    std::vector<std::string> samples;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) samples.push_back(test::random_phrase(rng, 5));
    // duplicates, some differing only in case and final punctuation
    for (int i = 0; i < static_cast<int>(rng() % 10); ++i) {
      auto s = samples[rng() % samples.size()];
      if (rng() % 2) s += "!";
      samples.push_back(s);
    }
    std::shuffle(samples.begin(), samples.end(), rng);
    const auto truth = normalize_phrase(samples[rng() % samples.size()]);
    ExpansionQuery q;
    q.abbreviation = abbreviate(truth);
    if (q.abbreviation.empty()) continue;
    q.noisy = rng() % 2;
    if (q.noisy) {
      NoiseModel noise(0.3, rng());
      q.abbreviation = simulate_typed_abbreviation(L, noise, q.abbreviation);
    }
    q.k = 1 + static_cast<int>(rng() % 8);

    const auto r = filter_and_rank(samples, q);
    std::map<std::string, int> expected;
    for (const auto& s : samples) ++expected[normalize_phrase(s).normalized];
    for (std::size_t i = 0; i < r.options.size(); ++i) {
      const auto& opt = r.options[i];
      o.require(matches_abbreviation(L, q.abbreviation, opt.phrase, q.noisy), "soundness: " + opt.phrase);
      o.require(opt.count == expected[opt.phrase], "aggregated count for " + opt.phrase);
      if (i) o.require(r.options[i - 1].count >= opt.count, "counts non-increasing");
    }
    o.require(r.options.size() <= static_cast<std::size_t>(q.k), "at most k options");

    std::vector<std::string> without;
    for (const auto& s : samples)
      if (normalize_phrase(s).normalized != truth.normalized) without.push_back(s);
    for (const auto& opt : filter_and_rank(without, q).options)
      o.require(opt.phrase != truth.normalized, "removing the truth forces a miss");
  }
  o.note(std::to_string(cases) + " randomized cases");
  return o;
}

Outcome beam_vs_bruteforce() {
  Outcome o;
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool = {"a",   "an",  "and", "am",  "apple", "b",     "be",  "but", "by",
                                         "can't", "cat", "c",   "do",  "don't", "d",     "i'm", "it",  "is",
                                         "i",   "bye", "ace", "cab", "abc",   "bad",   "o'clock", "10", "ok,"};
  const int width = 64;
  int models = 0, queries = 0, nonempty = 0;
  for (; models < 100 && o.pass; ++models) {
    const int order = 1 + static_cast<int>(rng() % 3);
    NgramModel m(order);
    auto shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t vsize = 2 + rng() % 19;
    const std::vector<std::string> vocab(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(vsize));
    auto tokens = vocab;
    tokens.push_back("</s>");
    tokens.push_back("<t>");
    for (int i = 0; i < 100; ++i) {
      std::vector<std::string> h;
      for (int j = 0; j < static_cast<int>(rng() % 3); ++j) h.push_back(tokens[rng() % tokens.size()]);
      m.add_count(h, tokens[rng() % (tokens.size() - 1)], 0.5 + static_cast<double>(rng() % 100000) / 1000.0);
    }
    for (int qi = 0; qi < 10; ++qi, ++queries) {
      std::string abbrev;
      while (abbrev.empty() || text::length(abbrev) > 6) {
        abbrev.clear();
        for (int j = 0; j < 1 + static_cast<int>(rng() % 5); ++j) abbrev += word_abbreviation(vocab[rng() % vocab.size()]);
      }
      ExpansionQuery q;
      q.abbreviation = abbrev;
      q.k = 5;
      if (rng() % 2) q.context = {vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()]};
      const auto oracle = test::enumerate(m, q);
      nonempty += !oracle.empty();
      const bool same = test::agrees(m, ngram_constrained_expand(m, q, width), oracle, q.k);
      o.require(same, "model " + std::to_string(models) + " query " + abbrev);
      if (!same) break;
    }
  }
  o.note(std::to_string(models) + " models, " + std::to_string(queries) + " queries (" + std::to_string(nonempty) +
         " with completions), beam width " + std::to_string(width));
  return o;
}

Outcome dataset_conversion() {
  Outcome o;
  const auto dialogs = read_dialogs_file(test::data_path("sit_down_dialog.tdc.txt"), "tdc-txt");
  o.require(dialogs.size() == 1, "one dialog read");
  if (!o.pass) return o;
  const auto ex = dialog_to_examples(dialogs[0], ContextMode::full);
  o.require(ex.size() == 6, "6 examples");
  if (!o.pass) return o;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    o.require(ex[i].context.size() == i, "context size at turn " + std::to_string(i + 1));
    if (i) o.require(std::equal(ex[i - 1].context.begin(), ex[i - 1].context.end(), ex[i].context.begin()), "nested");
  }
  const std::vector<std::string> expected = {
      "Shorthand: {wyltsd}. Full: {Would you like to sit down?}",
      "Context: {Would you like to sit down?}. Shorthand: {n,imfsu}. Full: {No, I'm fine standing up}",
      "Context: {Would you like to sit down?} {No, I'm fine standing up} {Are you sure you don't want to sit "
      "down?} {Been sitting all day. Work was just one meeting after another.} {Oh, I'm sorry. I don't enjoy work "
      "days like that.}. Shorthand: {ifgtsmlab}. Full: {It feels good to stretch my legs a bit.}"};
  o.require(render_canonical(ex[0]) == expected[0], "0-turn rendering");
  o.require(render_canonical(ex[1]) == expected[1], "1-turn rendering");
  o.require(render_canonical(ex[5]) == expected[2], "5-turn rendering");

  // the noisy shorthands shown alongside differ from the clean ones only at adjacent keys
  const auto& L = KeyboardLayout::standard();
  o.require(abbreviations_match_nearby(L, "wy!tsd", ex[0].shorthand), "wy!tsd ~ wyltsd");
  o.require(abbreviations_match_nearby(L, "n,infsu", ex[1].shorthand), "n,infsu ~ n,imfsu");
  o.require(abbreviations_match_nearby(L, "ifgtsmoab", ex[5].shorthand), "ifgtsmoab ~ ifgtsmlab");

  std::vector<Dialog> many;
  for (int i = 0; i < 859; ++i) {
    Dialog d;
    d.id = "d" + std::to_string(i);
    d.turns.emplace_back(0, "Hello " + std::to_string(i) + ".");
    d.turns.emplace_back(1, "Hi there.");
    many.push_back(std::move(d));
  }
  const auto windows = few_shot_windows(many).size();
  o.require(windows == 856, "859 dialogs -> 856 windows");
  o.note("6 examples, renderings exact, " + std::to_string(windows) + " windows from 859 dialogs");
  return o;
}

Dialog dialog(std::string id, std::vector<std::string> turns) {
  Dialog d;
  d.id = std::move(id);
  for (std::size_t i = 0; i < turns.size(); ++i) d.turns.emplace_back(static_cast<int>(i % 2), turns[i]);
  return d;
}

Outcome dedup_criteria() {
  Outcome o;
  const auto base = dialog("train", {"Hi there", "How are you", "Fine thanks", "Good to hear", "Bye now"});
  o.require(is_duplicate_dialog(base, dialog("t", {"HI THERE", "how are you", "fine thanks", "Good To Hear", "bye now"})),
            "all turns identical up to case");
  o.require(is_duplicate_dialog(base, dialog("t", {"hi there", "How are you", "fine THANKS", "x", "y"})),
            "three identical turns");
  o.require(!is_duplicate_dialog(base, dialog("t", {"hi there", "how are you", "x", "y", "z"})),
            "two identical turns is not a duplicate");
  o.require(!is_duplicate_dialog(base, dialog("t", {"Hi there", "How are you", "Fine thanks", "Good to hear"})),
            "different turn counts");
  std::vector<std::string> removed;
  const auto kept = dedup_split({dialog("a", {"hi there", "How are you", "Fine thanks", "q", "r"}),
                                 dialog("b", {"hi there", "how are you", "s", "t", "u"})},
                                {base}, &removed);
  o.require(removed == std::vector<std::string>{"a"} && kept.size() == 1 && kept[0].id == "b", "dedup_split");
  o.note("full match and >=3-turn match removed; 2-turn match kept");
  return o;
}

Outcome context_benefit() {
  Outcome o;
  const auto dialogs = test::topic_dialogs();
  const auto train = test::examples_of(dialogs);
  const auto test_set = test::replies_of(dialogs);
  const NgramExpander ngram(NgramModel::train(train, 3), 64);
  std::map<ContextMode, double> acc;
  for (auto mode : {ContextMode::none, ContextMode::previous_1}) {
    ExperimentConfig c;
    c.runs = 1;
    c.context_mode = mode;
    acc[mode] = run_experiment(c, test_set, ngram).overall.acc_at_k.mean;
  }
  const double gain = acc[ContextMode::previous_1] - acc[ContextMode::none];
  o.require(gain >= 20.0, "previous_1 beats none by >= 20 points");
  o.note("acc@5 none=" + fmt(acc[ContextMode::none], 1) + " previous_1=" + fmt(acc[ContextMode::previous_1], 1) +
         " gain=" + fmt(gain, 1) + " pp on " + std::to_string(test_set.size()) + " synthetic examples");
  return o;
}

Outcome remote_contract() {
  Outcome o;
  httplib::Server server;
  server.Post("/complete", [](const httplib::Request& req, httplib::Response& res) {
    const auto n = nlohmann::json::parse(req.body).at("num_samples").get<int>();
    std::vector<std::string> samples(static_cast<std::size_t>(n), "No, I'm fine standing up} trailing");
    res.set_content(nlohmann::json{{"samples", samples}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  EndpointConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/complete";
  RemoteExpander ex(std::make_shared<RemoteClient>(cfg), PromptSpec{}, SamplingConfig{});
  ExpansionQuery q;
  q.context = {"Would you like to sit down?"};
  q.abbreviation = "n,imfsu";
  try {
    const auto r = ex.expand(q, 0);
    o.require(r.raw_sample_count == 128, "128 samples");
    o.require(r.options.size() == 1 && r.options[0].count == 128, "samples aggregated");
  } catch (const std::exception& e) {
    o.require(false, e.what());
  }
  server.stop();
  th.join();
  o.note("large-model accuracy is not reproduced here; remote contract checked against a mock");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"abbreviation golden suite", abbreviation_golden},
      {"noise calibration", noise_calibration},
      {"per-cell distribution ('f', sigma 0.3)", per_cell_distribution},
      {"KSR arithmetic", ksr_arithmetic},
      {"KSR plausibility band", ksr_plausibility},
      {"filter pipeline properties", filter_properties},
      {"constrained decode vs brute force", beam_vs_bruteforce},
      {"dataset conversion", dataset_conversion},
      {"dedup criteria", dedup_criteria},
      {"context benefit", context_benefit},
      {"scope: remote backend via mock only", remote_contract},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failed += !out.pass;
    std::printf("%s  %s: %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
