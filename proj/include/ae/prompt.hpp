#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ae/dialog.hpp"
#include "ae/expander.hpp"

namespace ae {

enum class PromptMode { no_instr, zero_shot, few_shot };

PromptMode parse_prompt_mode(std::string_view name);
std::string_view to_string(PromptMode mode);

struct PromptSpec {
  PromptMode mode = PromptMode::no_instr;
  std::vector<AEExample> shots;  ///< exactly kFewShotCount for few_shot
  bool char_spaced = true;
};

inline constexpr std::size_t kFewShotCount = 4;

/// Optional instruction line, one rendered block per shot, then the query
/// block left open at "Full: {". Blocks are newline-separated.
/// Throws std::invalid_argument when a few_shot spec does not have 4 shots.
std::string build_prompt(const PromptSpec& spec, const ExpansionQuery& query);

}  // namespace ae
