#include "echosim/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>

#include "echosim/error.hpp"

namespace echosim {

namespace {

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space_byte(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space_byte(s.back())) s.remove_suffix(1);
  return s;
}

// Doubles brace bytes so a bound value can never introduce a placeholder.
std::string escape_braces(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    if (c == '{' || c == '}') out += c;
    out += c;
  }
  return out;
}

// Validates the token shape before handing it to strtod, which keeps
// "nan", "inf", and hex floats out of the pipeline.
bool parse_full_number(std::string_view s, double& out) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  bool dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] >= '0' && s[i] <= '9') {
      ++digits;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  if (digits == 0) return false;
  out = std::strtod(std::string(s).c_str(), nullptr);
  return true;
}

std::string_view key_of(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Influence: return "INFLUENCE";
    case ResponseKind::Compatibility: return "COMPATIBILITY";
    case ResponseKind::Stance:
    case ResponseKind::Generated: return "STANCE";
  }
  return "STANCE";
}

// Non-empty lines, trimmed, in order.
std::vector<std::string_view> nonempty_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t nl = raw.find('\n', start);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = trim(raw.substr(start, nl - start));
    if (!line.empty()) lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

void finalize_value(EngineResponse& r, double v, bool tolerant) {
  const auto [lo, hi] = response_range(r.kind);
  if (v < lo || v > hi) {
    r.value = std::clamp(v, lo, hi);
    r.status = ParseStatus::Recovered;
  } else {
    r.value = v;
    r.status = tolerant ? ParseStatus::Recovered : ParseStatus::Clean;
  }
}

// "KEY: value" with the whole remainder being one number.
bool match_value_line(std::string_view line, std::string_view key, double& out) {
  if (line.size() <= key.size() + 1) return false;
  if (line.substr(0, key.size()) != key || line[key.size()] != ':') return false;
  return parse_full_number(trim(line.substr(key.size() + 1)), out);
}

// The response with every whitespace byte dropped (lowercased), plus a map
// from squeezed index back to the original byte offset.
struct Squeezed {
  std::string text;
  std::vector<std::size_t> pos;
};

Squeezed squeeze(std::string_view raw) {
  Squeezed s;
  s.text.reserve(raw.size());
  s.pos.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (is_space_byte(raw[i])) continue;
    s.text += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
    s.pos.push_back(i);
  }
  return s;
}

// Number at squeezed position p: optional sign, digits, at most one dot.
bool scan_number_at(const std::string& sq, std::size_t p, double& out) {
  std::size_t i = p;
  if (i < sq.size() && (sq[i] == '+' || sq[i] == '-')) ++i;
  std::size_t digits = 0;
  bool dot = false;
  while (i < sq.size()) {
    if (sq[i] >= '0' && sq[i] <= '9') {
      ++digits;
      ++i;
    } else if (sq[i] == '.' && !dot) {
      dot = true;
      ++i;
    } else {
      break;
    }
  }
  if (digits == 0) return false;
  return parse_full_number(std::string_view(sq).substr(p, i - p), out);
}

// Latest occurrence of key (already lowercase) that is followed by an
// optional ':'/'=' and a parseable number. Returns npos when none is.
std::size_t find_keyed_number(const std::string& sq, std::string_view key, double& out) {
  std::size_t occ = sq.rfind(key);
  while (occ != std::string::npos) {
    std::size_t q = occ + key.size();
    if (q < sq.size() && (sq[q] == ':' || sq[q] == '=')) ++q;
    if (scan_number_at(sq, q, out)) return occ;
    occ = occ == 0 ? std::string::npos : sq.rfind(key, occ - 1);
  }
  return std::string::npos;
}

// Whitespace runs collapsed to single spaces, ends trimmed.
std::string collapse_spaces(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending = false;
  for (char c : raw) {
    if (is_space_byte(c)) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string render_template(std::string_view body, const Bindings& bindings) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c != '{') {
      out += c;
      ++i;
      continue;
    }
    const std::size_t close = body.find('}', i + 1);
    if (close == std::string_view::npos) {
      throw TemplateError(std::string(trim(body.substr(i))));
    }
    const std::string name(body.substr(i + 1, close - i - 1));
    const auto it = std::find_if(bindings.begin(), bindings.end(),
                                 [&](const auto& b) { return b.first == name; });
    if (it == bindings.end()) throw TemplateError(name);
    out += escape_braces(it->second);
    i = close + 1;
  }
  return out;
}

std::string sanitize_line(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\v') c = ' ';
  }
  return out;
}

std::string render_context(const AgentView& view) {
  std::string out = "User " + std::to_string(view.id) + " | current stance " +
                    format_micro(view.opinion.value());
  if (view.recent.empty()) {
    out += "\n(no recent posts)";
    return out;
  }
  for (const Post& post : view.recent) {
    out += "\n- (t=" + std::to_string(post.step) + ") " + sanitize_line(post.text);
  }
  return out;
}

std::string render_screen(const Screen& screen) {
  if (screen.posts.empty()) return "(empty screen)";
  std::string out;
  for (std::size_t i = 0; i < screen.posts.size(); ++i) {
    const Post& post = screen.posts[i];
    if (i > 0) out += '\n';
    out += "- (user " + std::to_string(post.author) + " | stance " +
           format_micro(post.stance.value()) + " | " +
           (screen.sources[i] == ScreenSource::Friend ? "friend" : "recommended") +
           " | t=" + std::to_string(post.step) + ") " + sanitize_line(post.text);
  }
  return out;
}

namespace {

constexpr const char* kPairBody =
    "You are role-playing the social media user described below.\n"
    "\n"
    "Your profile and recent posts:\n"
    "{self_context}\n"
    "\n"
    "The other account:\n"
    "{neighbor_context}\n"
    "\n"
    "{task_instructions}\n"
    "\n"
    "{output_schema}\n";

constexpr const char* kGenerateBody =
    "You are role-playing the social media user described below.\n"
    "\n"
    "Your profile and recent posts:\n"
    "{self_context}\n"
    "\n"
    "Your screen right now:\n"
    "{screen}\n"
    "\n"
    "{task_instructions}\n"
    "\n"
    "{output_schema}\n";

constexpr const char* kInfluenceInstructions =
    "Reason step by step, briefly: compare the other account's current stance "
    "with yours and judge how much reading them shifts you. When the gap is "
    "too wide to take seriously, the shift is 0.";

constexpr const char* kInfluenceSchema =
    "Finish with exactly one line in this form:\n"
    "INFLUENCE: <signed stance shift, a decimal number between -2 and 2>";

constexpr const char* kCompatibilityInstructions =
    "Reason step by step, briefly: judge how close the other account's stance "
    "is to yours.";

constexpr const char* kCompatibilitySchema =
    "Finish with exactly one line in this form:\n"
    "COMPATIBILITY: <a decimal number between 0 and 1, 1 meaning fully aligned>";

constexpr const char* kGenerateInstructions =
    "Reason step by step, briefly: read your screen, decide how it moves your "
    "stance, then write your next post in your own voice.";

constexpr const char* kGenerateSchema =
    "Finish with exactly two lines in this form:\n"
    "POST: <your post as one line of text>\n"
    "STANCE: <your updated stance, a decimal number between -1 and 1>";

}  // namespace

PromptTemplate opinion_template() { return {TemplateKind::Opinion, kPairBody}; }
PromptTemplate rewire_template() { return {TemplateKind::Rewire, kPairBody}; }
PromptTemplate generate_template() { return {TemplateKind::Generate, kGenerateBody}; }

std::string render_influence_prompt(const AgentView& self, const AgentView& neighbor) {
  return render_template(opinion_template().body,
                         {{"self_context", render_context(self)},
                          {"neighbor_context", render_context(neighbor)},
                          {"task_instructions", kInfluenceInstructions},
                          {"output_schema", kInfluenceSchema}});
}

std::string render_compatibility_prompt(const AgentView& self, const AgentView& other) {
  return render_template(rewire_template().body,
                         {{"self_context", render_context(self)},
                          {"neighbor_context", render_context(other)},
                          {"task_instructions", kCompatibilityInstructions},
                          {"output_schema", kCompatibilitySchema}});
}

std::string render_generate_prompt(const AgentView& self, const Screen& screen) {
  return render_template(generate_template().body,
                         {{"self_context", render_context(self)},
                          {"screen", render_screen(screen)},
                          {"task_instructions", kGenerateInstructions},
                          {"output_schema", kGenerateSchema}});
}

std::pair<double, double> response_range(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Influence: return {-2.0, 2.0};
    case ResponseKind::Compatibility: return {0.0, 1.0};
    case ResponseKind::Stance:
    case ResponseKind::Generated: return {-1.0, 1.0};
  }
  return {-1.0, 1.0};
}

EngineResponse parse_response(std::string_view raw, ResponseKind expected) {
  EngineResponse r;
  r.raw = std::string(raw);
  r.kind = expected;
  r.status = ParseStatus::Failed;

  // Strict pass: the schema's exact final line(s).
  const std::vector<std::string_view> lines = nonempty_lines(raw);
  double v = 0.0;
  if (expected != ResponseKind::Generated) {
    if (!lines.empty() && match_value_line(lines.back(), key_of(expected), v)) {
      finalize_value(r, v, /*tolerant=*/false);
      return r;
    }
  } else {
    if (lines.size() >= 2 && match_value_line(lines.back(), "STANCE", v)) {
      const std::string_view prev = lines[lines.size() - 2];
      if (prev.size() > 5 && prev.substr(0, 5) == "POST:") {
        const std::string_view text = trim(prev.substr(5));
        if (!text.empty()) {
          r.text = std::string(text);
          finalize_value(r, v, /*tolerant=*/false);
          return r;
        }
      }
    }
  }

  // Tolerant pass: drop every whitespace byte so keys and digits broken by
  // line breaks or stray spaces still line up, then take the latest key
  // occurrence that carries a number.
  const Squeezed sq = squeeze(raw);
  const std::string key = lower(key_of(expected));
  const std::size_t occ = find_keyed_number(sq.text, key, v);
  if (occ == std::string::npos) return r;

  if (expected != ResponseKind::Generated) {
    finalize_value(r, v, /*tolerant=*/true);
    return r;
  }

  // Post body: whatever sits between the (optional) "post" key and the
  // stance key. A missing body cannot be fabricated, so that stays Failed.
  std::size_t body_begin = 0;
  const std::size_t post_occ = sq.text.substr(0, occ).rfind("post");
  if (post_occ != std::string::npos) {
    std::size_t q = post_occ + 4;
    if (q < sq.text.size() && (sq.text[q] == ':' || sq.text[q] == '=')) ++q;
    if (q < sq.pos.size() && q <= occ) body_begin = sq.pos[q];
  }
  const std::size_t body_end = sq.pos[occ];
  if (body_begin >= body_end) return r;
  const std::string text = collapse_spaces(raw.substr(body_begin, body_end - body_begin));
  if (text.empty()) return r;
  r.text = text;
  finalize_value(r, v, /*tolerant=*/true);
  return r;
}

}  // namespace echosim
