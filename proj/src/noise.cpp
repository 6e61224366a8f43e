#include "ae/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "ae/text.hpp"

namespace ae {

KeyboardLayout::KeyboardLayout(std::array<char32_t, kRows * kCols> labels) {
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) {
      const auto i = static_cast<std::size_t>(r * kCols + c);
      keys_[i] = Key{labels[i], r, c};
    }
  for (std::size_t i = 0; i < keys_.size(); ++i)
    for (std::size_t j = i + 1; j < keys_.size(); ++j)
      if (keys_[i].label == keys_[j].label) throw std::invalid_argument("duplicate key label");
}

const KeyboardLayout& KeyboardLayout::standard() {
  static const KeyboardLayout layout({
      U'q', U'w', U'e', U'r', U't', U'y', U'u', U'i', U'o', U'p',
      U'a', U's', U'd', U'f', U'g', U'h', U'j', U'k', U'l', U'\'',
      U'z', U'x', U'c', U'v', U'b', U'n', U'm', U',', U'.', U'!',
  });
  return layout;
}

std::optional<Key> KeyboardLayout::find(char32_t label) const {
  for (const auto& k : keys_)
    if (k.label == label) return k;
  return std::nullopt;
}

namespace {

// Index of the unit cell containing v; integer boundaries go to the lower cell.
int cell_index(double v, int n) {
  const int i = static_cast<int>(std::ceil(v)) - 1;
  return std::clamp(i, 0, n - 1);
}

}  // namespace

char32_t key_at_point(const KeyboardLayout& layout, double x, double y) {
  if (std::isnan(x) || std::isnan(y)) throw std::invalid_argument("key_at_point: NaN coordinate");
  return layout.at(cell_index(y, KeyboardLayout::kRows), cell_index(x, KeyboardLayout::kCols)).label;
}

NoiseModel::NoiseModel(double sigma, std::uint64_t seed) : sigma_(sigma), rng_(seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
}

char32_t NoiseModel::press(const KeyboardLayout& layout, char32_t intended) {
  const auto key = layout.find(intended);
  if (!key) {
    ++unmapped_;
    return intended;
  }
  if (sigma_ == 0.0) return intended;
  const double x = key->center_x() + sigma_ * normal_(rng_);
  const double y = key->center_y() + sigma_ * normal_(rng_);
  return key_at_point(layout, x, y);
}

char32_t simulate_keypress(const KeyboardLayout& layout, NoiseModel& noise, char32_t intended) {
  return noise.press(layout, intended);
}

Abbreviation simulate_typed_abbreviation(const KeyboardLayout& layout, NoiseModel& noise,
                                         std::string_view abbrev) {
  auto cps = text::decode(abbrev);
  for (auto& c : cps) c = noise.press(layout, c);
  return text::encode(cps);
}

double estimate_cer(const KeyboardLayout& layout, double sigma,
                    const std::vector<Abbreviation>& corpus, std::uint64_t draws,
                    std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("estimate_cer: draws must be >= 1");
  std::vector<char32_t> chars;
  for (const auto& a : corpus)
    for (char32_t c : text::decode(a)) chars.push_back(c);
  if (chars.empty()) throw std::invalid_argument("estimate_cer: empty corpus");

  NoiseModel noise(sigma, seed);
  std::uint64_t altered = 0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const char32_t c = chars[i % chars.size()];
    if (noise.press(layout, c) != c) ++altered;
  }
  return static_cast<double>(altered) / static_cast<double>(draws);
}

bool chars_match_nearby(const KeyboardLayout& layout, char32_t typed, char32_t candidate) {
  const auto a = layout.find(typed);
  const auto b = layout.find(candidate);
  if (!a || !b) return false;
  return std::abs(a->row - b->row) <= 1 && std::abs(a->col - b->col) <= 1;
}

bool abbreviations_match_nearby(const KeyboardLayout& layout, std::string_view typed,
                                std::string_view candidate) {
  const auto a = text::decode(typed);
  const auto b = text::decode(candidate);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i] && !chars_match_nearby(layout, a[i], b[i])) return false;
  return true;
}

}  // namespace ae
