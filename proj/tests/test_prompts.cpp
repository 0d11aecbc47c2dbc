#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <regex>

#include "d2d/agents.hpp"
#include "d2d/prompts.hpp"
#include "reference_templates.hpp"

using namespace d2d;
namespace fs = std::filesystem;

namespace {

std::string unescape_latex(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}' || s[i + 1] == '_')) continue;
    out += s[i];
  }
  // Trailing spaces are layout artifacts of the source.
  out = std::regex_replace(out, std::regex(" +\n"), "\n");
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

RenderContext full_context() {
  return {{"input", "Claim text"},      {"domain", "Health"},           {"stage_name", "Rebuttal"},
          {"debate_history", "H"},      {"Profile", "P"},               {"fixed_stance", "Affirmative: the claim is real"},
          {"Shared_Memory", "MEM"},     {"dimension_name", "Clarity"},  {"previous_answer", "A"},
          {"critique", "C"}};
}

template <typename F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an Error");
  return Error(ErrorCode::ITEM_FAILED, "");
}

}  // namespace

TEST_CASE("built-in debate templates match the published wording") {
  const PromptRegistry reg;
  for (const auto& [id, escaped] : test::kEscapedTemplates) {
    CAPTURE(to_string(id));
    CHECK(reg.template_text(id) == unescape_latex(escaped));
    CHECK_FALSE(is_synthetic(id));
  }
}

TEST_CASE("rendered prompts equal the template outside placeholder spans") {
  const PromptRegistry reg;
  const auto ctx = full_context();
  for (const auto& [id, escaped] : test::kEscapedTemplates) {
    auto expected = unescape_latex(escaped);
    for (const auto& [name, value] : ctx) {
      const auto token = "{" + name + "}";
      for (size_t at; (at = expected.find(token)) != std::string::npos;) expected.replace(at, token.size(), value);
    }
    CHECK(reg.render_text(id, ctx, false) == expected);
  }
}

TEST_CASE("placeholders in order of first appearance") {
  const PromptRegistry reg;
  CHECK(reg.placeholders(PromptId::OPENING) == std::vector<std::string>{"Profile", "input", "fixed_stance"});
  CHECK(reg.placeholders(PromptId::JUDGE_EVALUATION) ==
        std::vector<std::string>{"Profile", "Shared_Memory", "dimension_name"});
  CHECK(reg.placeholders(PromptId::DOMAIN_INFERENCE) == std::vector<std::string>{"input"});
}

TEST_CASE("missing placeholders are all named") {
  const PromptRegistry reg;
  const auto e = error_of([&] { reg.render(PromptId::OPENING, {{"Profile", "P"}, {"input", "x"}}, false); });
  CHECK(e.code == ErrorCode::MISSING_PLACEHOLDER);
  CHECK(std::string(e.what()).find("fixed_stance") != std::string::npos);

  const auto both = error_of([&] { reg.render(PromptId::OPENING, {{"Profile", "P"}}, false); });
  CHECK(std::string(both.what()).find("input") != std::string::npos);
  CHECK(std::string(both.what()).find("fixed_stance") != std::string::npos);

  // Empty values count as missing except for history slots.
  CHECK(error_of([&] { reg.render(PromptId::DOMAIN_INFERENCE, {{"input", ""}}, false); }).code ==
        ErrorCode::MISSING_PLACEHOLDER);
  CHECK_NOTHROW(reg.render(PromptId::SHARED_MEMORY, {{"debate_history", ""}}, false));
  auto ctx = full_context();
  ctx["Shared_Memory"] = "";
  CHECK_NOTHROW(reg.render(PromptId::REBUTTAL, ctx, false));
}

TEST_CASE("rendering is pure and leaves no known placeholder behind") {
  const PromptRegistry reg;
  const auto ctx = full_context();
  for (PromptId id : kAllPromptIds) {
    for (bool neutral : {false, true}) {
      const auto a = reg.render(id, ctx, neutral);
      const auto b = reg.render(id, ctx, neutral);
      CHECK(a == b);
      REQUIRE(a.size() == 1);
      CHECK(a[0].role == Role::USER);
      for (const auto& [name, value] : ctx) CHECK(a[0].content.find("{" + name + "}") == std::string::npos);
    }
  }
}

TEST_CASE("neutral labels rewrite template lexemes only") {
  const PromptRegistry reg;
  auto ctx = full_context();
  ctx["input"] = "Affirmative action ruling";
  for (PromptId id : kAllPromptIds) {
    CAPTURE(to_string(id));
    const auto text = reg.render_text(id, ctx, true);
    const bool has_lexeme = reg.template_text(id).find("Affirmative") != std::string::npos ||
                            reg.template_text(id).find("Negative") != std::string::npos;
    CHECK((text != reg.render_text(id, ctx, false)) == has_lexeme);
    // Substituted values keep their original words.
    if (reg.template_text(id).find("{input}") != std::string::npos) {
      CHECK(text.find("Affirmative action ruling") != std::string::npos);
    }
    CHECK(relabel_neutral(reg.template_text(id)).find("Negative") == std::string::npos);
  }
  const auto eval = reg.render_text(PromptId::JUDGE_EVALUATION, ctx, true);
  CHECK(eval.find("{Supporter: X, Skeptic: Y}") != std::string::npos);
  CHECK(eval.find("Supporters defend the claim") != std::string::npos);
  CHECK(eval.find("Affirmative") == std::string::npos);
  CHECK(relabel_neutral("Affirmative and Negative, Affirmatives") == "Supporter and Skeptic, Supporters");
}

TEST_CASE("synthetic baseline templates") {
  const PromptRegistry reg;
  for (PromptId id : {PromptId::ZS_CLASSIFY, PromptId::COT_CLASSIFY, PromptId::SELF_REFLECT, PromptId::SELF_REVISE,
                      PromptId::SMAD_TURN, PromptId::SMAD_JUDGE}) {
    CHECK(is_synthetic(id));
  }
  CHECK(reg.template_text(PromptId::COT_CLASSIFY).find("step by step") != std::string::npos);
  CHECK(reg.template_text(PromptId::ZS_CLASSIFY).find("VERDICT: REAL") != std::string::npos);
  CHECK(reg.template_text(PromptId::SELF_REFLECT).find(kNoFurtherRevision) != std::string::npos);
}

TEST_CASE("prompt ids and stage templates") {
  for (PromptId id : kAllPromptIds) CHECK(parse_prompt_id(to_string(id)) == id);
  CHECK(error_of([] { parse_prompt_id("NOPE"); }).code == ErrorCode::UNKNOWN_ID);
  CHECK(prompt_for_stage(Stage::OPENING) == PromptId::OPENING);
  CHECK(prompt_for_stage(Stage::CLOSING) == PromptId::CLOSING);
}

TEST_CASE("template overrides from a directory") {
  const auto dir = fs::temp_directory_path() / ("d2d_prompts_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "DOMAIN_INFERENCE.txt") << "Domain of {input}?";
  const auto reg = PromptRegistry::with_overrides(dir.string());
  CHECK(reg.render_text(PromptId::DOMAIN_INFERENCE, {{"input", "x"}}, false) == "Domain of x?");
  CHECK(reg.template_text(PromptId::OPENING) == PromptRegistry().template_text(PromptId::OPENING));
  fs::remove_all(dir);
}

TEST_CASE("side labels and stance text") {
  CHECK(side_label(Stance::AFFIRMATIVE_REAL, false) == "Affirmative");
  CHECK(side_label(Stance::NEGATIVE_FAKE, true) == "Skeptic");
  CHECK(stance_text(Stance::AFFIRMATIVE_REAL, false) == "Affirmative: the claim is real");
  CHECK(stance_text(Stance::NEGATIVE_FAKE, true) == "Skeptic: the claim is fake");
  std::vector<Turn> turns = {{0, Stage::OPENING, Stance::AFFIRMATIVE_REAL, "aff-opening", "a", ""},
                             {1, Stage::OPENING, Stance::NEGATIVE_FAKE, "neg-opening", "b", ""}};
  CHECK(serialize_history(turns, false) == "[Opening Statement] [Affirmative]: a\n[Opening Statement] [Negative]: b");
}
