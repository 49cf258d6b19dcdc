#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "echosim/error.hpp"
#include "echosim/protocol.hpp"
#include "echosim/rng.hpp"
#include "helpers.hpp"

using namespace echosim;
using testutil::make_post;

TEST_CASE("template rendering substitutes placeholders") {
  CHECK(render_template("A{x}B", {{"x", "1"}}) == "A1B");
  CHECK(render_template("{a}{b}", {{"a", "1"}, {"b", "2"}}) == "12");
  CHECK(render_template("no placeholders", {}) == "no placeholders");
}

TEST_CASE("a missing binding names the placeholder it wanted") {
  try {
    render_template("need {screen} here", {{"other", "x"}});
    FAIL("should have thrown");
  } catch (const TemplateError& e) {
    CHECK(e.placeholder == "screen");
  }
  CHECK_THROWS_AS(render_template("open { and no close", {}), TemplateError);
}

TEST_CASE("bound values cannot smuggle new placeholders in") {
  // Braces inside a value are doubled, so they can never read as a
  // placeholder, and distinct values render to distinct prompts.
  const std::string out = render_template("X{v}Y", {{"v", "{screen}"}});
  CHECK(out == "X{{screen}}Y");
  CHECK(render_template("X{v}Y", {{"v", "a}b"}}) !=
        render_template("X{v}Y", {{"v", "a}}b"}}));
}

TEST_CASE("agent context lists id, stance, and recent posts") {
  AgentView v;
  v.id = 3;
  v.opinion = OpinionValue(0.5);
  const std::vector<Post> posts{make_post(3, 4, "first words", 0.5),
                                make_post(3, 7, "second\nline", 0.4)};
  v.recent = posts;
  CHECK(render_context(v) ==
        "User 3 | current stance 0.500000\n"
        "- (t=4) first words\n"
        "- (t=7) second line");  // embedded newline sanitized away

  AgentView empty;
  empty.id = 9;
  empty.opinion = OpinionValue(-1.0);
  CHECK(render_context(empty) == "User 9 | current stance -1.000000\n(no recent posts)");
}

TEST_CASE("screen rendering tags author, stance, source, and step") {
  Screen screen;
  screen.viewer = 0;
  screen.posts = {make_post(2, 5, "hello there", 0.25), make_post(7, 6, "counterpoint", -0.5)};
  screen.sources = {ScreenSource::Friend, ScreenSource::Recommended};
  CHECK(render_screen(screen) ==
        "- (user 2 | stance 0.250000 | friend | t=5) hello there\n"
        "- (user 7 | stance -0.500000 | recommended | t=6) counterpoint");

  CHECK(render_screen(Screen{}) == "(empty screen)");
}

TEST_CASE("prompts carry both contexts and the answer schema") {
  AgentView self;
  self.id = 0;
  self.opinion = OpinionValue(0.1);
  AgentView other;
  other.id = 1;
  other.opinion = OpinionValue(-0.3);

  const std::string inf = render_influence_prompt(self, other);
  CHECK(inf.find("User 0 | current stance 0.100000") != std::string::npos);
  CHECK(inf.find("User 1 | current stance -0.300000") != std::string::npos);
  CHECK(inf.find("INFLUENCE:") != std::string::npos);
  CHECK(inf.find("step by step") != std::string::npos);

  const std::string comp = render_compatibility_prompt(self, other);
  CHECK(comp.find("COMPATIBILITY:") != std::string::npos);
  CHECK(comp.find("step by step") != std::string::npos);

  Screen screen;
  screen.posts = {make_post(1, 2, "something", -0.3)};
  screen.sources = {ScreenSource::Friend};
  const std::string gen = render_generate_prompt(self, screen);
  CHECK(gen.find("POST:") != std::string::npos);
  CHECK(gen.find("STANCE:") != std::string::npos);
  CHECK(gen.find("- (user 1 | stance -0.300000 | friend | t=2) something") != std::string::npos);
}

TEST_CASE("prompts are injective over who is being asked") {
  // Distinct (id, stance) pairs must never render to the same prompt — the
  // mock transport depends on reading them back out.
  std::set<std::string> prompts;
  int combos = 0;
  for (UserId id : {0u, 1u, 7u}) {
    for (double op : {-1.0, -0.25, 0.0, 0.5}) {
      AgentView self;
      self.id = id;
      self.opinion = OpinionValue(op);
      AgentView other;
      other.id = 99;
      other.opinion = OpinionValue(0.9);
      prompts.insert(render_influence_prompt(self, other));
      ++combos;
    }
  }
  CHECK(prompts.size() == static_cast<std::size_t>(combos));
}

TEST_CASE("a well-formed final line parses clean") {
  const EngineResponse r =
      parse_response("I compared the two stances step by step.\nSTANCE: 0.7",
                     ResponseKind::Stance);
  CHECK(r.status == ParseStatus::Clean);
  CHECK(r.value == 0.7);
  CHECK(r.has_value());

  // No space after the colon is still the exact schema shape.
  CHECK(parse_response("STANCE:0.7", ResponseKind::Stance).status == ParseStatus::Clean);
  // Trailing blank lines don't spoil a clean parse.
  CHECK(parse_response("STANCE: -0.25\n\n  \n", ResponseKind::Stance).status ==
        ParseStatus::Clean);
}

TEST_CASE("each response kind answers to its own keyword") {
  CHECK(parse_response("INFLUENCE: -1.5", ResponseKind::Influence).value == -1.5);
  CHECK(parse_response("COMPATIBILITY: 0.75", ResponseKind::Compatibility).value == 0.75);
  // The wrong keyword for the expected kind is not a clean answer.
  CHECK(parse_response("INFLUENCE: 0.5", ResponseKind::Stance).status == ParseStatus::Failed);
}

TEST_CASE("whitespace-torn responses are recovered") {
  // A keyword broken across a line break, and digits split by spaces.
  const EngineResponse r = parse_response("STA\nNCE:0 .7", ResponseKind::Stance);
  CHECK(r.status == ParseStatus::Recovered);
  CHECK(r.value == 0.7);

  CHECK(parse_response("stance = 0.42", ResponseKind::Stance).value == 0.42);
  CHECK(parse_response("Stance: 0.7", ResponseKind::Stance).status == ParseStatus::Recovered);
  CHECK(parse_response("INFL U ENCE : -0 . 2 5", ResponseKind::Influence).value == -0.25);
}

TEST_CASE("the latest keyed number wins when several appear") {
  const EngineResponse r = parse_response(
      "STANCE: 0.1 was my first take, but on reflection STANCE: 0.8", ResponseKind::Stance);
  CHECK(r.status == ParseStatus::Recovered);
  CHECK(r.value == 0.8);
}

TEST_CASE("a schema echo without a number is skipped, not misread") {
  const EngineResponse r = parse_response(
      "STANCE: <your updated stance, a decimal number between -1 and 1>\n"
      "STANCE: 0.4",
      ResponseKind::Stance);
  CHECK(r.value == 0.4);
  CHECK(parse_response("STANCE: <a number>", ResponseKind::Stance).status ==
        ParseStatus::Failed);
}

TEST_CASE("out-of-range values clamp and downgrade to recovered") {
  const EngineResponse comp = parse_response("COMPATIBILITY: 1.4", ResponseKind::Compatibility);
  CHECK(comp.status == ParseStatus::Recovered);
  CHECK(comp.value == 1.0);

  const EngineResponse st = parse_response("STANCE: -3", ResponseKind::Stance);
  CHECK(st.status == ParseStatus::Recovered);
  CHECK(st.value == -1.0);

  const EngineResponse inf = parse_response("INFLUENCE: 2.5", ResponseKind::Influence);
  CHECK(inf.status == ParseStatus::Recovered);
  CHECK(inf.value == 2.0);
}

TEST_CASE("refusals and numberless text fail rather than fabricate") {
  const EngineResponse r = parse_response("I cannot help with that.", ResponseKind::Stance);
  CHECK(r.status == ParseStatus::Failed);
  CHECK_FALSE(r.has_value());
  CHECK(parse_response("", ResponseKind::Stance).status == ParseStatus::Failed);
  CHECK(parse_response("STANCE: none", ResponseKind::Stance).status == ParseStatus::Failed);
  CHECK(parse_response("nan is not a stance. STANCE: nan", ResponseKind::Stance).status ==
        ParseStatus::Failed);
}

TEST_CASE("trailing words after the number downgrade but still parse") {
  const EngineResponse r = parse_response("STANCE: 0.70 final answer", ResponseKind::Stance);
  CHECK(r.status == ParseStatus::Recovered);
  CHECK(r.value == 0.7);
}

TEST_CASE("generated posts parse text and stance together") {
  const EngineResponse r = parse_response(
      "Thinking about my feed, step by step.\n"
      "POST: Communities drift apart when feeds narrow.\n"
      "STANCE: -0.25",
      ResponseKind::Generated);
  CHECK(r.status == ParseStatus::Clean);
  CHECK(r.text == "Communities drift apart when feeds narrow.");
  CHECK(r.value == -0.25);
}

TEST_CASE("a torn generated response still recovers text and stance") {
  const EngineResponse r = parse_response(
      "POST: feeds are\nnarrowing fast\nSTA NCE: 0. 5", ResponseKind::Generated);
  CHECK(r.status == ParseStatus::Recovered);
  CHECK(r.value == 0.5);
  CHECK(r.text == "feeds are narrowing fast");
}

TEST_CASE("a generated response without post text fails") {
  CHECK(parse_response("POST:\nSTANCE: 0.4", ResponseKind::Generated).status ==
        ParseStatus::Failed);
  CHECK(parse_response("STANCE: 0.4", ResponseKind::Generated).status == ParseStatus::Failed);
  CHECK(parse_response("no structure at all", ResponseKind::Generated).status ==
        ParseStatus::Failed);
}

TEST_CASE("response ranges match each kind") {
  CHECK(response_range(ResponseKind::Stance) == std::pair{-1.0, 1.0});
  CHECK(response_range(ResponseKind::Generated) == std::pair{-1.0, 1.0});
  CHECK(response_range(ResponseKind::Influence) == std::pair{-2.0, 2.0});
  CHECK(response_range(ResponseKind::Compatibility) == std::pair{0.0, 1.0});
}

TEST_CASE("sanitize_line flattens control whitespace") {
  CHECK(sanitize_line("a\nb\tc\rd") == "a b c d");
  CHECK(sanitize_line("plain") == "plain");
}
