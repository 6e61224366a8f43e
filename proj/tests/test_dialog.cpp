#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "ae/dialog.hpp"
#include "test_util.hpp"

using namespace ae;

namespace {

Dialog make_dialog(std::string id, const std::vector<std::string>& turns) {
  Dialog d{std::move(id), {}};
  for (const auto& t : turns) d.turns.emplace_back(static_cast<int>(d.turns.size() % 2), t);
  return d;
}

Dialog sit_down_dialog() {
  std::ifstream in(test::data_path("sit_down_dialog.tdc.txt"));
  auto ds = read_dialogs_tdc(in);
  REQUIRE(ds.size() == 1);
  return ds.front();
}

}  // namespace

TEST_CASE("split_sentences") {
  CHECK(split_sentences("Been sitting all day. Work was just one meeting after another.") ==
        std::vector<std::string>{"Been sitting all day.", "Work was just one meeting after another."});
  CHECK(split_sentences("hello") == std::vector<std::string>{"hello"});
  CHECK(split_sentences("ok... fine") == std::vector<std::string>{"ok...", "fine"});
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   ").empty());
  CHECK(split_sentences("Is it 3.5 now? Yes!") == std::vector<std::string>{"Is it 3.5 now?", "Yes!"});
  CHECK(split_sentences("Wait?! Okay.") == std::vector<std::string>{"Wait?!", "Okay."});
}

TEST_CASE("Turn keeps sentences consistent with text") {
  Turn t(0, "Oh, I'm sorry. I don't enjoy work days like that.");
  REQUIRE(t.sentences.size() == 2);
  std::string joined = t.sentences[0] + " " + t.sentences[1];
  CHECK(joined == t.text);
}

TEST_CASE("dialog_to_examples on the six-turn dialog") {
  const auto d = sit_down_dialog();
  REQUIRE(d.turns.size() == 6);
  const auto ex = dialog_to_examples(d, ContextMode::full);
  REQUIRE(ex.size() == 6);

  const std::vector<std::string> shorthands = {"wyltsd", "n,imfsu", "aysydtwtsd", "bsad", "o,ims", "ifgtsmlab"};
  for (std::size_t i = 0; i < ex.size(); ++i) {
    CHECK(ex[i].turn_index == static_cast<int>(i + 1));
    CHECK(ex[i].context.size() == i);
    CHECK(ex[i].shorthand == shorthands[i]);
    CHECK(ex[i].noise_sigma == 0.0);
    if (i + 1 < ex.size()) {
      // nested contexts
      CHECK(std::equal(ex[i].context.begin(), ex[i].context.end(), ex[i + 1].context.begin()));
    }
  }
  CHECK(ex[1].context == std::vector<std::string>{"Would you like to sit down?"});
  CHECK(ex[3].full.normalized == "been sitting all day");
  CHECK(ex[5].context[3] == "Been sitting all day. Work was just one meeting after another.");

  CHECK(render_canonical(ex[0]) == "Shorthand: {wyltsd}. Full: {Would you like to sit down?}");
  CHECK(render_canonical(ex[1]) ==
        "Context: {Would you like to sit down?}. Shorthand: {n,imfsu}. Full: {No, I'm fine standing up}");
  CHECK(render_canonical(ex[5]) ==
        "Context: {Would you like to sit down?} {No, I'm fine standing up} {Are you sure you don't want to sit "
        "down?} {Been sitting all day. Work was just one meeting after another.} {Oh, I'm sorry. I don't enjoy "
        "work days like that.}. Shorthand: {ifgtsmlab}. Full: {It feels good to stretch my legs a bit.}");
}

TEST_CASE("context modes") {
  const auto d = make_dialog("d", {"First turn here.", "Second one.", "Third turn."});
  const auto full = dialog_to_examples(d, ContextMode::full);
  const auto prev = dialog_to_examples(d, ContextMode::previous_1);
  const auto none = dialog_to_examples(d, ContextMode::none);
  REQUIRE(full.size() == 3);
  REQUIRE(prev.size() == 3);
  REQUIRE(none.size() == 3);
  CHECK(prev[2].context == std::vector<std::string>{"Second one."});
  CHECK(prev[2].context.back() == full[2].context.back());
  CHECK(prev[0].context.empty());
  for (const auto& e : none) CHECK(e.context.empty());

  const auto single = make_dialog("s", {"Hi there."});
  for (auto mode : {ContextMode::full, ContextMode::previous_1, ContextMode::none}) {
    const auto e = dialog_to_examples(single, mode);
    REQUIRE(e.size() == 1);
    CHECK(e[0].context.empty());
  }
}

TEST_CASE("targets without an abbreviation are dropped and counted") {
  const auto d = make_dialog("p", {"Hello there.", "...", "Bye."});
  std::size_t dropped = 0;
  const auto ex = dialog_to_examples(d, ContextMode::full, &dropped);
  CHECK(dropped == 1);
  REQUIRE(ex.size() == 2);
  CHECK(ex[1].turn_index == 3);
  CHECK(ex[1].context.size() == 2);  // the dropped turn still counts as context
}

TEST_CASE("duplicate dialog criteria") {
  const auto a = make_dialog("a", {"Hi", "How are you", "Fine", "Great"});
  const auto upper = make_dialog("b", {"HI", "how ARE you", "fine", "GREAT"});
  CHECK(is_duplicate_dialog(a, upper));

  const auto three = make_dialog("c", {"Hi", "How are you", "Fine", "Something else"});
  CHECK(is_duplicate_dialog(a, three));

  const auto two = make_dialog("d", {"Hi", "How are you", "Nope", "Something else"});
  CHECK_FALSE(is_duplicate_dialog(a, two));

  const auto longer = make_dialog("e", {"Hi", "How are you", "Fine", "Great", "Extra"});
  CHECK_FALSE(is_duplicate_dialog(a, longer));

  // short dialogs: all turns equal counts even below three
  CHECK(is_duplicate_dialog(make_dialog("x", {"Yo", "Hey"}), make_dialog("y", {"yo", "hey"})));
  CHECK_FALSE(is_duplicate_dialog(make_dialog("x", {"Yo", "Hey"}), make_dialog("y", {"yo", "hi"})));
}

namespace {

std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Brute-force pairwise oracle written directly from the two criteria.
bool oracle_dup(const Dialog& a, const Dialog& b) {
  if (a.turns.size() != b.turns.size()) return false;
  int same = 0;
  for (std::size_t i = 0; i < a.turns.size(); ++i) same += ascii_lower(a.turns[i].text) == ascii_lower(b.turns[i].text);
  return same == static_cast<int>(a.turns.size()) || same >= 3;
}

}  // namespace

TEST_CASE("dedup_split with planted duplicates") {
  std::vector<Dialog> train;
  for (int i = 0; i < 5; ++i)
    train.push_back(make_dialog("tr" + std::to_string(i), {"a" + std::to_string(i), "b" + std::to_string(i),
                                                           "c" + std::to_string(i), "d" + std::to_string(i)}));
  std::vector<Dialog> test;
  for (int i = 0; i < 7; ++i)
    test.push_back(make_dialog("te" + std::to_string(i), {"p" + std::to_string(i), "q" + std::to_string(i),
                                                          "r" + std::to_string(i), "s" + std::to_string(i)}));
  // planted: verbatim copy, case variant, three shared turns
  test.insert(test.begin() + 2, make_dialog("dup-verbatim", {"a1", "b1", "c1", "d1"}));
  test.insert(test.begin() + 5, make_dialog("dup-case", {"A3", "B3", "C3", "D3"}));
  test.push_back(make_dialog("dup-three", {"a4", "b4", "zz", "d4"}));
  // near miss: two shared turns only
  test.push_back(make_dialog("near", {"a2", "b2", "zz", "yy"}));
  REQUIRE(test.size() == 11);

  std::vector<std::string> removed;
  const auto kept = dedup_split(test, train, &removed);

  std::vector<std::string> expected_kept;
  for (const auto& t : test)
    if (std::none_of(train.begin(), train.end(), [&](const Dialog& r) { return oracle_dup(t, r); }))
      expected_kept.push_back(t.id);
  REQUIRE(expected_kept.size() == 8);

  std::vector<std::string> kept_ids;
  for (const auto& k : kept) kept_ids.push_back(k.id);
  CHECK(kept_ids == expected_kept);
  CHECK(removed == std::vector<std::string>{"dup-verbatim", "dup-case", "dup-three"});

  CHECK(dedup_split(test, {}).size() == test.size());

  // monotone in the train set
  auto more_train = train;
  more_train.push_back(make_dialog("tr-extra", {"p0", "q0", "r0", "x"}));
  CHECK(dedup_split(test, more_train).size() <= kept.size());
}

TEST_CASE("zero-shot instructions") {
  AEExample ex;
  ex.shorthand = "wyltsd";
  ex.full = normalize_phrase("Would you like to sit down?");
  RenderOptions zs;
  zs.instruction = Instruction::zero_shot;
  CHECK(render_canonical(ex, zs) ==
        "Given acronym, write the full phrase.\nShorthand: {wyltsd}. Full: {Would you like to sit down?}");
  ex.context = {"Hi."};
  CHECK(render_canonical(ex, zs).rfind(
            "Given previous turn(s) of conversation and acronym of reply, write the full phrase.", 0) == 0);
}

TEST_CASE("render then parse recovers context and shorthand") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    AEExample ex;
    const int n_ctx = static_cast<int>(rng() % 4);
    for (int c = 0; c < n_ctx; ++c) ex.context.push_back(test::random_phrase(rng) + ".");
    ex.full = normalize_phrase(test::random_phrase(rng));
    ex.shorthand = abbreviate(ex.full);
    if (ex.shorthand.empty()) continue;
    for (bool spaced : {false, true})
      for (bool open : {false, true}) {
        RenderOptions o;
        o.char_spaced = spaced;
        o.open_full = open;
        o.instruction = (rng() % 2) ? Instruction::zero_shot : Instruction::none;
        const auto parsed = parse_canonical(render_canonical(ex, o));
        CHECK(parsed.context == ex.context);
        CHECK(parsed.shorthand == ex.shorthand);
        CHECK(parsed.full.has_value() == !open);
      }
  }
  CHECK_THROWS_AS(parse_canonical("nothing here"), std::invalid_argument);
}

TEST_CASE("corpus readers and example JSONL") {
  std::istringstream jsonl(
      R"({"id": "d1", "turns": [{"speaker": 0, "text": "Hi."}, {"speaker": 1, "text": "Hello there!"}]})"
      "\n\n"
      R"({"id": 7, "turns": [{"text": "One"}]})"
      "\n");
  const auto ds = read_dialogs_jsonl(jsonl);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].id == "d1");
  CHECK(ds[0].turns[1].speaker == 1);
  CHECK(ds[1].id == "7");

  std::istringstream bad(R"({"id": "x", "turns": []})");
  CHECK_THROWS(read_dialogs_jsonl(bad));

  std::istringstream tdc("A.\tB.\tC.\n\nD.\tE.\n");
  const auto td = read_dialogs_tdc(tdc);
  REQUIRE(td.size() == 2);
  CHECK(td[0].turns.size() == 3);
  CHECK(td[1].id == "tdc-3");

  auto ex = dialog_to_examples(ds[0], ContextMode::full);
  std::stringstream io;
  write_examples_jsonl(io, ex);
  const auto back = read_examples_jsonl(io);
  REQUIRE(back.size() == ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    CHECK(back[i].context == ex[i].context);
    CHECK(back[i].shorthand == ex[i].shorthand);
    CHECK(back[i].full.raw == ex[i].full.raw);
    CHECK(back[i].turn_index == ex[i].turn_index);
  }
  CHECK(nlohmann::json(ex[1])["abbrev_len"] == 2);
}
