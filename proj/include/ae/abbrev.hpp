#pragma once

#include <string>
#include <string_view>

namespace ae {

/// A sentence together with its canonical comparison form.
///
/// `normalized` is lowercased, single-spaced, trimmed, and has any
/// sentence-final '.', '!' or '?' removed. Two phrases are considered the
/// same expansion iff their normalized forms are equal.
struct Phrase {
  std::string raw;
  std::string normalized;

  friend bool operator==(const Phrase& a, const Phrase& b) {
    return a.normalized == b.normalized;
  }
};

/// Abbreviation characters as typed: lowercase letters, digits and kept
/// punctuation, never whitespace. Stored as UTF-8.
using Abbreviation = std::string;

/// Idempotent: normalize_phrase(normalize_phrase(x).normalized) == normalize_phrase(x).
Phrase normalize_phrase(std::string_view raw);

/// Contribution of one whitespace-delimited token to the phrase abbreviation.
///
/// Letters contribute only the initial of each letter run; a run restarts
/// after an apostrophe (dropped), a digit, or any other punctuation mark
/// (kept in place). Digits are always kept. A hyphen between two
/// alphanumerics is word-internal: dropped, and does not restart the run.
///
///   "i'm" -> "im", "can't" -> "ct", "no," -> "n,", "10" -> "10",
///   "2nd" -> "2n", "well-known" -> "w", "u.s." -> "u.s."
Abbreviation word_abbreviation(std::string_view token);

/// Concatenation of word_abbreviation over the whitespace tokens of an
/// already normalized phrase.
Abbreviation abbreviate(const Phrase& phrase);

/// Shorthand for abbreviate(normalize_phrase(raw)).
Abbreviation abbreviate_text(std::string_view raw);

}  // namespace ae
