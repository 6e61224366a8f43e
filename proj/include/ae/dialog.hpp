#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ae/abbrev.hpp"

namespace ae {

struct Turn {
  int speaker = 0;
  std::string text;
  std::vector<std::string> sentences;

  Turn() = default;
  Turn(int speaker, std::string text);
};

struct Dialog {
  std::string id;
  std::vector<Turn> turns;
};

enum class ContextMode { none, previous_1, full };

/// One abbreviation-expansion record derived from a dialog turn.
struct AEExample {
  std::string dialog_id;
  std::vector<std::string> context;  ///< full text of earlier turns, oldest first
  Abbreviation shorthand;
  Phrase full;  ///< first sentence of the target turn
  int turn_index = 1;
  double noise_sigma = 0.0;

  /// Code-point length of the shorthand, used for length slicing.
  std::size_t abbrev_len() const;
};

ContextMode parse_context_mode(std::string_view name);
std::string_view to_string(ContextMode mode);

/// Splits at '.', '!' or '?' runs followed by whitespace or end of text.
/// Delimiters stay with their sentence; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Restricts a full-history context to what `mode` exposes.
std::vector<std::string> select_context(const std::vector<std::string>& history, ContextMode mode);

/// One example per turn. Turns whose first sentence abbreviates to nothing
/// are skipped and counted in `dropped`.
std::vector<AEExample> dialog_to_examples(const Dialog& dialog, ContextMode mode,
                                          std::size_t* dropped = nullptr);

/// True iff both dialogs have the same number of turns and either every
/// turn, or at least three turn positions, match case-insensitively.
bool is_duplicate_dialog(const Dialog& a, const Dialog& b);

/// Test dialogs that duplicate no train dialog, order preserved.
std::vector<Dialog> dedup_split(const std::vector<Dialog>& test, const std::vector<Dialog>& train,
                                std::vector<std::string>* removed_ids = nullptr);

enum class Instruction { none, zero_shot };

inline constexpr std::string_view kInstructionWithContext =
    "Given previous turn(s) of conversation and acronym of reply, write the full phrase.";
inline constexpr std::string_view kInstructionNoContext = "Given acronym, write the full phrase.";

std::string_view instruction_for(bool has_context);

struct RenderOptions {
  Instruction instruction = Instruction::none;
  /// Space-separate the shorthand characters (model prompts).
  bool char_spaced = false;
  /// Stop after "Full: {" so a model can complete the expansion.
  bool open_full = false;
};

/// `Context: {t1} {t2}. Shorthand: {abbr}. Full: {full}`; the Context clause
/// is omitted for an empty context.
std::string render_canonical(const AEExample& ex, const RenderOptions& opts = {});
std::string render_canonical(const std::vector<std::string>& context, std::string_view shorthand,
                             std::optional<std::string_view> full, const RenderOptions& opts);

/// Fields recovered from a rendered example.
struct ParsedCanonical {
  std::vector<std::string> context;
  std::string shorthand;
  std::optional<std::string> full;  ///< absent when the Full clause is left open
};

/// Inverse of render_canonical for brace-free turn text. Space-separated
/// shorthand is collapsed back. Throws std::invalid_argument on malformed input.
ParsedCanonical parse_canonical(std::string_view rendered);

// Corpus I/O.

/// One JSON object per line: {"id": ..., "turns": [{"speaker": n, "text": ...}]}.
std::vector<Dialog> read_dialogs_jsonl(std::istream& in);
/// One dialog per line, turns separated by tabs; ids are "<prefix><line number>".
std::vector<Dialog> read_dialogs_tdc(std::istream& in, std::string_view id_prefix = "tdc-");
std::vector<Dialog> read_dialogs_file(const std::string& path, std::string_view format);

void to_json(nlohmann::json& j, const AEExample& ex);
void from_json(const nlohmann::json& j, AEExample& ex);

std::vector<AEExample> read_examples_jsonl(std::istream& in);
std::vector<AEExample> read_examples_file(const std::string& path);
void write_examples_jsonl(std::ostream& out, const std::vector<AEExample>& examples);

}  // namespace ae
