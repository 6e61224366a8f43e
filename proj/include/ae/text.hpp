#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the abbreviation, filtering and metrics code.
namespace ae::text {

/// Decodes UTF-8 into code points. Ill-formed sequences become U+FFFD.
std::vector<char32_t> decode(std::string_view utf8);

std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// Number of code points (the unit used for all length-based metrics).
std::size_t length(std::string_view utf8);

/// Full Unicode lowercase mapping (root locale).
std::string to_lower(std::string_view utf8);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_apostrophe(char32_t cp);

/// Splits on runs of Unicode whitespace; never returns empty tokens.
std::vector<std::string> split_words(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Inserts one space between consecutive code points: "n,im" -> "n , i m".
std::string space_chars(std::string_view utf8);

}  // namespace ae::text
