#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "ae/abbrev.hpp"

namespace ae {

struct Key {
  char32_t label;
  int row;  ///< 0..2, top to bottom
  int col;  ///< 0..9, left to right

  double center_x() const { return col + 0.5; }
  double center_y() const { return row + 0.5; }
};

/// 3x10 grid of unit-square keys with no gaps:
///
///   q w e r t y u i o p
///   a s d f g h j k l '
///   z x c v b n m , . !
///
/// Characters without a key (digits, other symbols) are never perturbed.
class KeyboardLayout {
 public:
  static constexpr int kRows = 3;
  static constexpr int kCols = 10;

  static const KeyboardLayout& standard();

  explicit KeyboardLayout(std::array<char32_t, kRows * kCols> labels);

  const std::array<Key, kRows * kCols>& keys() const { return keys_; }
  const Key& at(int row, int col) const { return keys_[static_cast<std::size_t>(row * kCols + col)]; }
  std::optional<Key> find(char32_t label) const;

 private:
  std::array<Key, kRows * kCols> keys_;
};

/// Label of the key square containing (x, y). Points off the board clamp to
/// the nearest square; points on a shared edge go to the lower-index key.
char32_t key_at_point(const KeyboardLayout& layout, double x, double y);

/// Isotropic Gaussian keystroke channel with its own random stream.
class NoiseModel {
 public:
  NoiseModel(double sigma, std::uint64_t seed);

  double sigma() const { return sigma_; }
  /// Keypresses whose character had no key and passed through unchanged.
  std::uint64_t unmapped_count() const { return unmapped_; }

  char32_t press(const KeyboardLayout& layout, char32_t intended);

 private:
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t unmapped_ = 0;
};

char32_t simulate_keypress(const KeyboardLayout& layout, NoiseModel& noise, char32_t intended);

/// Independent simulate_keypress per code point.
Abbreviation simulate_typed_abbreviation(const KeyboardLayout& layout, NoiseModel& noise,
                                         std::string_view abbrev);

/// Monte-Carlo character error rate: cycles through the corpus characters
/// for `draws` keypresses and returns the fraction that came out altered.
/// Throws std::invalid_argument for an empty corpus or draws == 0.
double estimate_cer(const KeyboardLayout& layout, double sigma,
                    const std::vector<Abbreviation>& corpus, std::uint64_t draws,
                    std::uint64_t seed = 0);

/// Same key, or keys within Chebyshev distance 1. Unmapped characters never match.
bool chars_match_nearby(const KeyboardLayout& layout, char32_t typed, char32_t candidate);

/// Equal length and every position either identical or chars_match_nearby.
bool abbreviations_match_nearby(const KeyboardLayout& layout, std::string_view typed,
                                std::string_view candidate);

}  // namespace ae
