#include "ae/dialog.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ae/text.hpp"

namespace ae {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

Turn::Turn(int speaker_, std::string text_)
    : speaker(speaker_), text(std::move(text_)), sentences(split_sentences(text)) {}

std::size_t AEExample::abbrev_len() const { return text::length(shorthand); }

ContextMode parse_context_mode(std::string_view name) {
  if (name == "none") return ContextMode::none;
  if (name == "previous_1") return ContextMode::previous_1;
  if (name == "full") return ContextMode::full;
  throw std::invalid_argument("unknown context mode: " + std::string(name));
}

std::string_view to_string(ContextMode mode) {
  switch (mode) {
    case ContextMode::none: return "none";
    case ContextMode::previous_1: return "previous_1";
    case ContextMode::full: return "full";
  }
  return "full";
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  while (i < text.size()) {
    if (is_terminator(text[i])) {
      std::size_t j = i;
      while (j < text.size() && is_terminator(text[j])) ++j;
      if (j == text.size() || is_ascii_space(text[j])) flush(j);
      i = j;
    } else {
      ++i;
    }
  }
  flush(text.size());
  return out;
}

std::vector<std::string> select_context(const std::vector<std::string>& history, ContextMode mode) {
  switch (mode) {
    case ContextMode::none: return {};
    case ContextMode::previous_1:
      if (history.empty()) return {};
      return {history.back()};
    case ContextMode::full: return history;
  }
  return history;
}

std::vector<AEExample> dialog_to_examples(const Dialog& dialog, ContextMode mode,
                                          std::size_t* dropped) {
  std::vector<AEExample> out;
  std::vector<std::string> history;
  for (std::size_t n = 0; n < dialog.turns.size(); ++n) {
    const Turn& turn = dialog.turns[n];
    const std::string turn_text = collapse_spaces(turn.text);
    if (!turn.sentences.empty()) {
      AEExample ex;
      ex.dialog_id = dialog.id;
      ex.turn_index = static_cast<int>(n + 1);
      ex.full = normalize_phrase(collapse_spaces(turn.sentences.front()));
      ex.shorthand = abbreviate(ex.full);
      ex.context = select_context(history, mode);
      if (ex.shorthand.empty()) {
        if (dropped) ++*dropped;
      } else {
        out.push_back(std::move(ex));
      }
    } else if (dropped) {
      ++*dropped;
    }
    history.push_back(turn_text);
  }
  return out;
}

bool is_duplicate_dialog(const Dialog& a, const Dialog& b) {
  if (a.turns.size() != b.turns.size()) return false;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.turns.size(); ++i)
    if (text::to_lower(a.turns[i].text) == text::to_lower(b.turns[i].text)) ++same;
  return same == a.turns.size() || same >= 3;
}

std::vector<Dialog> dedup_split(const std::vector<Dialog>& test, const std::vector<Dialog>& train,
                                std::vector<std::string>* removed_ids) {
  std::vector<Dialog> out;
  for (const auto& t : test) {
    bool dup = false;
    for (const auto& r : train)
      if (is_duplicate_dialog(t, r)) {
        dup = true;
        break;
      }
    if (!dup)
      out.push_back(t);
    else if (removed_ids)
      removed_ids->push_back(t.id);
  }
  return out;
}

std::string_view instruction_for(bool has_context) {
  return has_context ? kInstructionWithContext : kInstructionNoContext;
}

std::string render_canonical(const std::vector<std::string>& context, std::string_view shorthand,
                             std::optional<std::string_view> full, const RenderOptions& opts) {
  std::string out;
  if (opts.instruction == Instruction::zero_shot) {
    out += instruction_for(!context.empty());
    out += '\n';
  }
  if (!context.empty()) {
    out += "Context: ";
    for (std::size_t i = 0; i < context.size(); ++i) {
      if (i) out += ' ';
      out += '{';
      out += context[i];
      out += '}';
    }
    out += ". ";
  }
  out += "Shorthand: {";
  out += opts.char_spaced ? text::space_chars(shorthand) : std::string(shorthand);
  out += "}. Full: {";
  if (!opts.open_full && full) {
    out += *full;
    out += '}';
  }
  return out;
}

std::string render_canonical(const AEExample& ex, const RenderOptions& opts) {
  return render_canonical(ex.context, ex.shorthand, trim(ex.full.raw), opts);
}

ParsedCanonical parse_canonical(std::string_view s) {
  ParsedCanonical out;
  const auto sh = s.rfind("Shorthand: {");
  if (sh == std::string_view::npos) throw std::invalid_argument("missing Shorthand clause");

  const auto ctx = s.find("Context: ");
  if (ctx != std::string_view::npos && ctx < sh) {
    std::size_t i = ctx + 9;
    while (i < sh) {
      if (s[i] == '{') {
        const auto close = s.find('}', i);
        if (close == std::string_view::npos || close > sh)
          throw std::invalid_argument("unterminated context turn");
        out.context.emplace_back(s.substr(i + 1, close - i - 1));
        i = close + 1;
      } else {
        ++i;
      }
    }
  }

  const auto sh_open = sh + 12;
  const auto sh_close = s.find('}', sh_open);
  if (sh_close == std::string_view::npos) throw std::invalid_argument("unterminated shorthand");
  for (char c : s.substr(sh_open, sh_close - sh_open))
    if (c != ' ') out.shorthand += c;

  const auto full = s.find("Full: {", sh_close);
  if (full == std::string_view::npos) throw std::invalid_argument("missing Full clause");
  const auto f_open = full + 7;
  const auto f_close = s.find('}', f_open);
  if (f_close != std::string_view::npos) out.full = std::string(s.substr(f_open, f_close - f_open));
  return out;
}

std::vector<Dialog> read_dialogs_jsonl(std::istream& in) {
  std::vector<Dialog> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Dialog d;
    d.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                            : "line-" + std::to_string(lineno);
    for (const auto& t : j.at("turns")) {
      d.turns.emplace_back(t.value("speaker", static_cast<int>(d.turns.size() % 2)),
                           t.at("text").get<std::string>());
    }
    if (d.turns.empty()) throw std::runtime_error("dialog without turns at line " + std::to_string(lineno));
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialog> read_dialogs_tdc(std::istream& in, std::string_view id_prefix) {
  std::vector<Dialog> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    Dialog d;
    d.id = std::string(id_prefix) + std::to_string(lineno);
    std::size_t start = 0;
    while (start <= line.size()) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) tab = line.size();
      auto t = trim(std::string_view(line).substr(start, tab - start));
      if (!t.empty()) d.turns.emplace_back(static_cast<int>(d.turns.size() % 2), std::move(t));
      start = tab + 1;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialog> read_dialogs_file(const std::string& path, std::string_view format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (format == "jsonl") return read_dialogs_jsonl(in);
  if (format == "tdc-txt") return read_dialogs_tdc(in);
  throw std::invalid_argument("unknown corpus format: " + std::string(format));
}

void to_json(nlohmann::json& j, const AEExample& ex) {
  j = nlohmann::json{{"dialog_id", ex.dialog_id},
                     {"turn_index", ex.turn_index},
                     {"context", ex.context},
                     {"shorthand", ex.shorthand},
                     {"full", ex.full.raw},
                     {"full_normalized", ex.full.normalized},
                     {"abbrev_len", ex.abbrev_len()},
                     {"noise_sigma", ex.noise_sigma}};
}

void from_json(const nlohmann::json& j, AEExample& ex) {
  ex.dialog_id = j.value("dialog_id", "");
  ex.turn_index = j.value("turn_index", 1);
  ex.context = j.value("context", std::vector<std::string>{});
  ex.full = normalize_phrase(j.at("full").get<std::string>());
  ex.shorthand = j.contains("shorthand") ? j["shorthand"].get<std::string>() : abbreviate(ex.full);
  ex.noise_sigma = j.value("noise_sigma", 0.0);
}

std::vector<AEExample> read_examples_jsonl(std::istream& in) {
  std::vector<AEExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(nlohmann::json::parse(line).get<AEExample>());
  }
  return out;
}

std::vector<AEExample> read_examples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_examples_jsonl(in);
}

void write_examples_jsonl(std::ostream& out, const std::vector<AEExample>& examples) {
  for (const auto& ex : examples) out << nlohmann::json(ex).dump() << '\n';
}

}  // namespace ae
