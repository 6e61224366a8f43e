#include "ae/prompt.hpp"

#include <stdexcept>

namespace ae {

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "no_instr") return PromptMode::no_instr;
  if (name == "zero_shot") return PromptMode::zero_shot;
  if (name == "few_shot") return PromptMode::few_shot;
  throw std::invalid_argument("unknown prompt mode: " + std::string(name));
}

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::no_instr: return "no_instr";
    case PromptMode::zero_shot: return "zero_shot";
    case PromptMode::few_shot: return "few_shot";
  }
  return "no_instr";
}

std::string build_prompt(const PromptSpec& spec, const ExpansionQuery& query) {
  if (spec.mode == PromptMode::few_shot && spec.shots.size() != kFewShotCount)
    throw std::invalid_argument("few_shot prompts need exactly 4 shots");

  std::string out;
  if (spec.mode != PromptMode::no_instr) {
    out += instruction_for(!query.context.empty());
    out += '\n';
  }
  RenderOptions shot_opts;
  shot_opts.char_spaced = spec.char_spaced;
  if (spec.mode == PromptMode::few_shot)
    for (const auto& shot : spec.shots) {
      out += render_canonical(shot, shot_opts);
      out += '\n';
    }
  RenderOptions query_opts = shot_opts;
  query_opts.open_full = true;
  out += render_canonical(query.context, query.abbreviation, std::nullopt, query_opts);
  return out;
}

}  // namespace ae
