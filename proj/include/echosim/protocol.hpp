#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "echosim/engine.hpp"
#include "echosim/graph.hpp"

namespace echosim {

// The structured text protocol between the simulator and a language model:
// prompt templates with named {placeholders}, deterministic context/screen
// rendering, and a parser that survives the usual response corruption
// (line breaks inside keys, split digits, reasoning preambles, refusals).

enum class TemplateKind { Opinion, Rewire, Generate };

struct PromptTemplate {
  TemplateKind kind = TemplateKind::Opinion;
  std::string body;  // UTF-8 text with {placeholder} slots
};

using Bindings = std::vector<std::pair<std::string, std::string>>;

// Byte-deterministic substitution of {name} slots. Unbound placeholders
// throw TemplateError naming the placeholder. Brace bytes inside bound
// values are doubled ("{" -> "{{", "}" -> "}}") before substitution so the
// rendering stays an injective function of the bindings.
std::string render_template(std::string_view body, const Bindings& bindings);

// One user's context block: a header carrying the current stance at fixed
// 6-decimal precision, then the recent posts, oldest first.
//   User 12 | current stance -0.350000
//   - (t=3) <text>
std::string render_context(const AgentView& view);

// Screen block, one line per post. The "| stance <v> |" cell is what lets a
// text-only counterparty recover the exact numbers a post carries.
//   - (user 7 | stance 0.250000 | friend | t=14) <text>
std::string render_screen(const Screen& screen);

// Collapses newlines/tabs so embedded text cannot break line-oriented
// framing. Applied to every post body at render time.
std::string sanitize_line(std::string_view text);

// Shipped default templates: a role line, the context blocks, step-by-step
// reasoning instructions, and an explicit final-line output schema.
PromptTemplate opinion_template();
PromptTemplate rewire_template();
PromptTemplate generate_template();

// Fully rendered prompts for the three engine calls.
std::string render_influence_prompt(const AgentView& self, const AgentView& neighbor);
std::string render_compatibility_prompt(const AgentView& self, const AgentView& other);
std::string render_generate_prompt(const AgentView& self, const Screen& screen);

enum class ParseStatus { Clean, Recovered, Failed };

// What a response is expected to carry. Stance/Influence/Compatibility are
// single final-line values; Generated is a post body plus its stance.
enum class ResponseKind { Stance, Influence, Compatibility, Generated };

struct EngineResponse {
  std::string raw;
  ResponseKind kind = ResponseKind::Stance;
  ParseStatus status = ParseStatus::Failed;
  double value = 0.0;  // stance / influence / compatibility; absent when Failed
  std::string text;    // post body, Generated only

  bool has_value() const { return status != ParseStatus::Failed; }
};

// Legal range for each response kind; parsed values outside it are clamped
// and the response is downgraded to Recovered.
std::pair<double, double> response_range(ResponseKind kind);

// Two-pass extraction. The strict pass expects the schema's final line(s)
// exactly ("INFLUENCE: <v>", "COMPATIBILITY: <v>", "STANCE: <v>", or
// "POST: <text>" then "STANCE: <v>") and yields Clean. The tolerant pass
// strips every whitespace byte so keys and digits broken across lines or
// spaces still match, and yields Recovered. Anything else is Failed; a
// value is never fabricated.
EngineResponse parse_response(std::string_view raw, ResponseKind expected);

}  // namespace echosim
