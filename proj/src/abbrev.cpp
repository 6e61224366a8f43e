#include "ae/abbrev.hpp"

#include "ae/text.hpp"

namespace ae {

namespace {

bool is_final_punct(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_alnum(char32_t c) { return text::is_letter(c) || text::is_digit(c); }

}  // namespace

Phrase normalize_phrase(std::string_view raw) {
  Phrase p;
  p.raw = std::string(raw);
  auto cps = text::decode(text::to_lower(raw));

  // Strip sentence-final punctuation (and whitespace around it) repeatedly.
  auto end = cps.size();
  while (end > 0 && (text::is_space(cps[end - 1]) || is_final_punct(cps[end - 1]))) --end;
  cps.resize(end);

  p.normalized = text::join(text::split_words(text::encode(cps)), " ");
  return p;
}

Abbreviation word_abbreviation(std::string_view token) {
  const auto cps = text::decode(text::to_lower(token));
  std::vector<char32_t> out;
  bool run_start = true;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (text::is_apostrophe(c)) {
      run_start = true;
    } else if (text::is_digit(c)) {
      out.push_back(c);
      run_start = true;
    } else if (text::is_letter(c)) {
      if (run_start) out.push_back(c);
      run_start = false;
    } else if (c == U'-' && i > 0 && i + 1 < cps.size() && is_alnum(cps[i - 1]) &&
               is_alnum(cps[i + 1])) {
      // word-internal hyphen
    } else if (!text::is_space(c)) {
      out.push_back(c);
      run_start = true;
    }
  }
  return text::encode(out);
}

Abbreviation abbreviate(const Phrase& phrase) {
  Abbreviation out;
  for (const auto& tok : text::split_words(phrase.normalized)) out += word_abbreviation(tok);
  return out;
}

Abbreviation abbreviate_text(std::string_view raw) { return abbreviate(normalize_phrase(raw)); }

}  // namespace ae
