#include "ae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "ae/text.hpp"

namespace ae {

bool EvalRecord::matched() const {
  return std::find(options.begin(), options.end(), ground_truth) != options.end();
}

double accuracy_at_k(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw std::invalid_argument("accuracy_at_k: no records");
  const auto hits = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.matched(); });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::vector<std::string>, int> out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

double sentence_bleu(std::string_view candidate, std::string_view reference) {
  const auto ref = text::split_words(reference);
  if (ref.empty()) throw std::invalid_argument("sentence_bleu: empty reference");
  const auto cand = text::split_words(candidate);
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4 && n <= cand.size(); ++n) {
    const auto c = ngram_counts(cand, n);
    const auto r = ngram_counts(ref, n);
    int matches = 0;
    for (const auto& [g, cnt] : c) {
      auto it = r.find(g);
      if (it != r.end()) matches += std::min(cnt, it->second);
    }
    const double total = static_cast<double>(cand.size() - n + 1);
    const double num = matches > 0 ? static_cast<double>(matches) : kBleuEpsilon;
    log_sum += std::log(num / total);
    ++orders;
  }
  const double c_len = static_cast<double>(cand.size());
  const double r_len = static_cast<double>(ref.size());
  const double bp = c_len < r_len ? std::exp(1.0 - r_len / c_len) : 1.0;
  return bp * std::exp(log_sum / orders);
}

double bleu_at_k(const std::vector<EvalRecord>& records, BleuReduction reduction) {
  if (records.empty()) throw std::invalid_argument("bleu_at_k: no records");
  double sum = 0.0;
  for (const auto& r : records) {
    double best = 0.0;
    if (reduction == BleuReduction::rank1) {
      if (!r.options.empty()) best = sentence_bleu(r.options.front(), r.ground_truth);
    } else {
      for (const auto& o : r.options) best = std::max(best, sentence_bleu(o, r.ground_truth));
    }
    sum += best;
  }
  return 100.0 * sum / static_cast<double>(records.size());
}

double record_ksr(std::size_t abbrev_len, std::size_t full_len, bool matched) {
  if (full_len == 0) throw std::invalid_argument("record_ksr: empty phrase");
  const double la = static_cast<double>(abbrev_len);
  const double lf = static_cast<double>(full_len);
  return matched ? (1.0 - la / lf) * 100.0 : (1.0 - (la + lf) / lf) * 100.0;
}

KsrResult ksr(const std::vector<EvalRecord>& records) {
  KsrResult out;
  double all = 0.0, success = 0.0;
  std::size_t counted = 0;
  for (const auto& r : records) {
    const auto lf = text::length(r.ground_truth);
    if (lf == 0) {
      ++out.excluded;
      continue;
    }
    const bool hit = r.matched();
    const double v = record_ksr(text::length(r.abbreviation), lf, hit);
    all += v;
    ++counted;
    if (hit) {
      success += v;
      ++out.matched;
    }
  }
  if (counted > 0) out.ksr_all = all / static_cast<double>(counted);
  if (out.matched > 0) out.ksr_success = success / static_cast<double>(out.matched);
  return out;
}

SliceMetrics compute_slice(const std::vector<EvalRecord>& records, BleuReduction reduction) {
  SliceMetrics m;
  m.n = records.size();
  if (records.empty()) return m;
  m.acc_at_k = accuracy_at_k(records);
  m.bleu_at_k = bleu_at_k(records, reduction);
  const auto k = ksr(records);
  m.ksr_all = k.ksr_all;
  m.ksr_success = k.ksr_success;
  return m;
}

std::vector<LengthBin> default_length_bins() { return {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}}; }

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

SliceSummary summarize(const std::vector<SliceMetrics>& runs) {
  SliceSummary s;
  std::vector<double> acc, bleu, all, success;
  for (const auto& r : runs) {
    s.n = std::max(s.n, r.n);
    if (r.n == 0) continue;
    acc.push_back(r.acc_at_k);
    bleu.push_back(r.bleu_at_k);
    all.push_back(r.ksr_all);
    if (r.ksr_success) success.push_back(*r.ksr_success);
  }
  s.acc_at_k = mean_sd(acc);
  s.bleu_at_k = mean_sd(bleu);
  s.ksr_all = mean_sd(all);
  s.ksr_success = mean_sd(success);
  return s;
}

namespace {

double round1(double v) { return std::round(v * 10.0) / 10.0; }

nlohmann::json slice_json(const SliceSummary& s) {
  auto pair = [](const MeanSd& m) { return nlohmann::json{{"mean", round1(m.mean)}, {"sd", round1(m.sd)}}; };
  return {{"n", s.n},
          {"acc_at_k", pair(s.acc_at_k)},
          {"bleu_at_k", pair(s.bleu_at_k)},
          {"ksr_all", pair(s.ksr_all)},
          {"ksr_success", pair(s.ksr_success)}};
}

void csv_row(std::ostringstream& os, const std::string& label, const SliceSummary& s) {
  os << label << ',' << s.n;
  for (const auto* m : {&s.acc_at_k, &s.bleu_at_k, &s.ksr_all, &s.ksr_success})
    os << ',' << round1(m->mean) << ',' << round1(m->sd);
  os << '\n';
}

}  // namespace

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["runs"] = report.runs;
  j["overall"] = slice_json(report.overall);
  j["per_bin"] = nlohmann::json::object();
  for (const auto& [label, s] : report.per_bin) j["per_bin"][label] = slice_json(s);
  j["per_turn"] = nlohmann::json::object();
  for (const auto& [turn, s] : report.per_turn) j["per_turn"][std::to_string(turn)] = slice_json(s);
  j["metadata"] = report.metadata;
  return j;
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "slice,n,acc_at_k,acc_sd,bleu_at_k,bleu_sd,ksr_all,ksr_all_sd,ksr_success,ksr_success_sd\n";
  csv_row(os, "all", report.overall);
  for (const auto& [label, s] : report.per_bin) csv_row(os, "len " + label, s);
  for (const auto& [turn, s] : report.per_turn) csv_row(os, "turn " + std::to_string(turn), s);
  return os.str();
}

}  // namespace ae
