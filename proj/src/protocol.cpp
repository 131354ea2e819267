#include "hoiagent/protocol.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace hoiagent::protocol {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on `delim`, ignoring delimiters inside [ ] brackets.
std::vector<std::string_view> split_top_level(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    else if (s[i] == ']' && depth > 0) --depth;
    else if (s[i] == delim && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

bool parse_number(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

/// Parses "[x1,y1,x2,y2]" (already trimmed) into a valid BBox.
/// Returns an explanation on failure.
std::optional<std::string> parse_box_token(std::string_view token, BBox& out) {
  if (token.empty() || token.front() != '[') return "expected '['";
  if (token.back() != ']') return "missing closing ']'";
  auto inner = token.substr(1, token.size() - 2);
  auto parts = split_top_level(inner, ',');
  if (parts.size() != 4) {
    return "expected 4 numbers, got " + std::to_string(parts.size());
  }
  std::array<double, 4> vals{};
  for (size_t i = 0; i < 4; ++i) {
    if (!parse_number(parts[i], vals[i])) {
      return "'" + std::string(trim(parts[i])) + "' is not a number";
    }
  }
  out = BBox{vals[0], vals[1], vals[2], vals[3]};
  if (out.x1 < 0.0 || out.y1 < 0.0) return "negative coordinate";
  if (out.x2 < out.x1 || out.y2 < out.y1) return "inverted coordinates";
  return std::nullopt;
}

struct BlockSpan {
  size_t open = 0;
  size_t end = 0;  // one past the closing tag
};

std::optional<ParseError> locate_block(std::string_view raw, std::string_view open_tag,
                                       std::string_view close_tag, const char* name,
                                       BlockSpan& span) {
  const size_t opens = count_occurrences(raw, open_tag);
  if (opens > 1) {
    return ParseError{ParseErrorKind::DuplicateBlock,
                      std::string("more than one <") + name + "> block", name};
  }
  if (opens == 0) {
    return ParseError{ParseErrorKind::MissingBlock,
                      std::string("no <") + name + "> block", name};
  }
  span.open = raw.find(open_tag);
  const size_t close = raw.find(close_tag, span.open + open_tag.size());
  if (close == std::string_view::npos) {
    return ParseError{ParseErrorKind::UnclosedBlock,
                      std::string("<") + name + "> block never closes", name};
  }
  span.end = close + close_tag.size();
  return std::nullopt;
}

}  // namespace

std::string to_string(ToolKind kind) {
  switch (kind) {
    case ToolKind::image_crop: return "image_crop";
    case ToolKind::outpaint: return "outpaint";
    case ToolKind::viewpoint_transform: return "viewpoint_transform";
    case ToolKind::action_description: return "action_description";
    case ToolKind::scene_explanation: return "scene_explanation";
  }
  return "image_crop";
}

std::optional<ToolKind> tool_from_string(std::string_view name) {
  std::string canon;
  canon.reserve(name.size());
  for (char c : trim(name)) {
    canon.push_back(c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (canon == "image_crop") return ToolKind::image_crop;
  if (canon == "outpaint") return ToolKind::outpaint;
  if (canon == "viewpoint_transform") return ToolKind::viewpoint_transform;
  if (canon == "action_description") return ToolKind::action_description;
  if (canon == "scene_explanation") return ToolKind::scene_explanation;
  // The tool carries two names in the wild; accept both, render one.
  if (canon == "image_description") return ToolKind::scene_explanation;
  return std::nullopt;
}

const std::vector<ToolKind>& all_tool_kinds() {
  static const std::vector<ToolKind> kinds = {
      ToolKind::image_crop, ToolKind::outpaint, ToolKind::viewpoint_transform,
      ToolKind::action_description, ToolKind::scene_explanation};
  return kinds;
}

std::string to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MissingBlock: return "MissingBlock";
    case ParseErrorKind::DuplicateBlock: return "DuplicateBlock";
    case ParseErrorKind::UnclosedBlock: return "UnclosedBlock";
    case ParseErrorKind::StrayText: return "StrayText";
    case ParseErrorKind::MissingSeparator: return "MissingSeparator";
    case ParseErrorKind::MultipleSeparators: return "MultipleSeparators";
    case ParseErrorKind::MalformedBox: return "MalformedBox";
    case ParseErrorKind::UnknownTool: return "UnknownTool";
    case ParseErrorKind::DanglingLabel: return "DanglingLabel";
    case ParseErrorKind::UnexpectedToken: return "UnexpectedToken";
    case ParseErrorKind::MalformedRecord: return "MalformedRecord";
    case ParseErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ParseErrorKind::EmptyAnswer: return "EmptyAnswer";
  }
  return "UnknownError";
}

std::string ParseError::describe() const {
  std::string out = to_string(kind);
  if (record_ordinal > 0) out += " (record " + std::to_string(record_ordinal) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

ParseResult<Envelope> extract_envelope(std::string_view raw) {
  BlockSpan think_span, answer_span;
  if (auto err = locate_block(raw, kThinkOpen, kThinkClose, "think", think_span)) {
    // Report duplicate answers ahead of think problems so the caller sees
    // the structural fault rather than a consequence of it.
    if (err->kind != ParseErrorKind::DuplicateBlock &&
        count_occurrences(raw, kAnswerOpen) > 1) {
      return ParseError{ParseErrorKind::DuplicateBlock, "more than one <answer> block", "answer"};
    }
    return *err;
  }
  if (auto err = locate_block(raw, kAnswerOpen, kAnswerClose, "answer", answer_span)) {
    return *err;
  }

  const bool disjoint = think_span.end <= answer_span.open || answer_span.end <= think_span.open;
  if (!disjoint) {
    return ParseError{ParseErrorKind::StrayText, "think and answer blocks overlap"};
  }
  const auto& first = think_span.open < answer_span.open ? think_span : answer_span;
  const auto& second = think_span.open < answer_span.open ? answer_span : think_span;
  auto is_blank = [](std::string_view s) { return trim(s).empty(); };
  if (!is_blank(raw.substr(0, first.open)) ||
      !is_blank(raw.substr(first.end, second.open - first.end)) ||
      !is_blank(raw.substr(second.end))) {
    return ParseError{ParseErrorKind::StrayText, "text outside the think/answer blocks"};
  }

  Envelope env;
  env.think = std::string(raw.substr(think_span.open + kThinkOpen.size(),
                                     think_span.end - kThinkClose.size() -
                                         (think_span.open + kThinkOpen.size())));
  env.answer = std::string(raw.substr(answer_span.open + kAnswerOpen.size(),
                                      answer_span.end - kAnswerClose.size() -
                                          (answer_span.open + kAnswerOpen.size())));
  return env;
}

ParseResult<Turn1Decision> parse_turn1(std::string_view answer_text) {
  const size_t separators = count_occurrences(answer_text, ";");
  if (separators == 0) {
    return ParseError{ParseErrorKind::MissingSeparator,
                      "expected one ';' between detections and tools"};
  }
  if (separators > 1) {
    return ParseError{ParseErrorKind::MultipleSeparators,
                      "more than one ';' in the answer"};
  }
  const size_t sep = answer_text.find(';');
  const auto detection_text = answer_text.substr(0, sep);
  const auto tool_text = answer_text.substr(sep + 1);

  Turn1Decision decision;
  if (!trim(detection_text).empty()) {
    auto tokens = split_top_level(detection_text, ',');
    for (size_t i = 0; i < tokens.size(); i += 2) {
      auto label_token = trim(tokens[i]);
      if (label_token.empty()) {
        return ParseError{ParseErrorKind::UnexpectedToken, "empty detection item"};
      }
      if (label_token.front() == '[') {
        return ParseError{ParseErrorKind::UnexpectedToken,
                          "box where an object label was expected",
                          std::string(label_token)};
      }
      auto label = EntityLabel::parse(label_token);
      if (!label) {
        return ParseError{ParseErrorKind::UnexpectedToken,
                          "label is empty after normalization", std::string(label_token)};
      }
      if (i + 1 >= tokens.size()) {
        return ParseError{ParseErrorKind::DanglingLabel,
                          "label '" + label->str() + "' has no following box",
                          label->str()};
      }
      auto box_token = trim(tokens[i + 1]);
      if (box_token.empty() || box_token.front() != '[') {
        return ParseError{ParseErrorKind::DanglingLabel,
                          "label '" + label->str() + "' is not followed by a box",
                          label->str()};
      }
      BBox box;
      if (auto why = parse_box_token(box_token, box)) {
        return ParseError{ParseErrorKind::MalformedBox,
                          *why + " in '" + std::string(box_token) + "'"};
      }
      decision.detections.emplace_back(*label, box);
    }
  }

  if (!trim(tool_text).empty()) {
    std::set<ToolKind> seen;
    for (auto token : split_top_level(tool_text, ',')) {
      auto name = trim(token);
      auto kind = tool_from_string(name);
      if (!kind) {
        return ParseError{ParseErrorKind::UnknownTool,
                          "unknown tool '" + std::string(name) + "'",
                          std::string(name)};
      }
      if (seen.insert(*kind).second) decision.tools.push_back(*kind);
    }
  }
  return decision;
}

namespace {

/// Cursor over a Turn-2 answer. All helpers leave `pos` on failure
/// unspecified; callers bail out immediately.
struct Scanner {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
};

ParseError record_error(int ordinal, std::string why) {
  return ParseError{ParseErrorKind::MalformedRecord, std::move(why), "", ordinal};
}

/// Parses one `idx: verb, object, [box], [box]` record starting at the
/// scanner position. Does not consume a trailing comma.
std::optional<ParseError> parse_one_record(Scanner& s, int ordinal, Turn2Record& out) {
  s.skip_ws();
  size_t digits_start = s.pos;
  while (!s.done() && std::isdigit(static_cast<unsigned char>(s.peek()))) ++s.pos;
  if (s.pos == digits_start) {
    return record_error(ordinal, "expected 'idx:' at the start of the record");
  }
  long long index = 0;
  std::from_chars(s.text.data() + digits_start, s.text.data() + s.pos, index);
  if (index <= 0) return record_error(ordinal, "record index must be positive");
  s.skip_ws();
  if (s.done() || s.peek() != ':') {
    return record_error(ordinal, "expected ':' after the record index");
  }
  ++s.pos;

  auto parse_label = [&](const char* what, EntityLabel& label) -> std::optional<ParseError> {
    s.skip_ws();
    size_t start = s.pos;
    while (!s.done() && s.peek() != ',') {
      if (s.peek() == '[' || s.peek() == ']' || s.peek() == ':') {
        return record_error(ordinal, std::string("unexpected '") + s.peek() +
                                         "' in the " + what + " label");
      }
      ++s.pos;
    }
    if (s.done()) {
      return record_error(ordinal, std::string("record ends before the ") + what +
                                       " label is complete");
    }
    auto parsed = EntityLabel::parse(s.text.substr(start, s.pos - start));
    if (!parsed) return record_error(ordinal, std::string("empty ") + what + " label");
    label = *parsed;
    ++s.pos;  // consume ','
    return std::nullopt;
  };

  auto parse_box = [&](const char* what, BBox& box) -> std::optional<ParseError> {
    s.skip_ws();
    if (s.done() || s.peek() != '[') {
      return record_error(ordinal, std::string("expected '[' to open the ") + what + " box");
    }
    size_t start = s.pos;
    while (!s.done() && s.peek() != ']') ++s.pos;
    if (s.done()) {
      return record_error(ordinal, std::string("unterminated ") + what + " box");
    }
    ++s.pos;  // include ']'
    if (auto why = parse_box_token(s.text.substr(start, s.pos - start), box)) {
      return record_error(ordinal, std::string(what) + " box: " + *why);
    }
    return std::nullopt;
  };

  if (auto err = parse_label("verb", out.verb)) return err;
  if (auto err = parse_label("object", out.object)) return err;
  if (auto err = parse_box("human", out.human_box)) return err;
  s.skip_ws();
  if (s.done() || s.peek() != ',') {
    return record_error(ordinal, "expected ',' between the two boxes");
  }
  ++s.pos;
  if (auto err = parse_box("object", out.object_box)) return err;
  out.index = static_cast<int>(index);
  return std::nullopt;
}

}  // namespace

ParseResult<Turn2Answer> parse_turn2(std::string_view answer_text) {
  if (trim(answer_text).empty()) {
    return ParseError{ParseErrorKind::EmptyAnswer, "answer asserts no interactions"};
  }
  Scanner s{answer_text};
  Turn2Answer answer;
  std::set<int> indices;
  int ordinal = 0;
  while (true) {
    ++ordinal;
    Turn2Record record;
    if (auto err = parse_one_record(s, ordinal, record)) return *err;
    if (!indices.insert(record.index).second) {
      return ParseError{ParseErrorKind::DuplicateIndex,
                        "index " + std::to_string(record.index) + " appears twice",
                        std::to_string(record.index), ordinal};
    }
    answer.records.push_back(std::move(record));
    s.skip_ws();
    if (s.done()) break;
    if (s.peek() != ',') {
      return record_error(ordinal, "expected ',' or end of answer after the record");
    }
    ++s.pos;
  }
  return answer;
}

Turn2Answer parse_turn2_salvage(std::string_view answer_text) {
  // Record starts: a top-level digit run followed by ':' that sits at the
  // beginning of the text or right after a top-level comma.
  std::vector<size_t> starts;
  int depth = 0;
  bool at_boundary = true;
  for (size_t i = 0; i < answer_text.size(); ++i) {
    char c = answer_text[i];
    if (c == '[') ++depth;
    else if (c == ']' && depth > 0) --depth;
    if (depth == 0 && at_boundary && std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < answer_text.size() && std::isdigit(static_cast<unsigned char>(answer_text[j]))) ++j;
      size_t k = j;
      while (k < answer_text.size() && std::isspace(static_cast<unsigned char>(answer_text[k]))) ++k;
      if (k < answer_text.size() && answer_text[k] == ':') starts.push_back(i);
    }
    if (!std::isspace(static_cast<unsigned char>(c))) {
      at_boundary = depth == 0 && c == ',';
    }
  }

  Turn2Answer answer;
  std::set<int> indices;
  for (size_t n = 0; n < starts.size(); ++n) {
    size_t begin = starts[n];
    size_t end = n + 1 < starts.size() ? starts[n + 1] : answer_text.size();
    auto candidate = answer_text.substr(begin, end - begin);
    // Strip the comma separating this record from the next.
    auto trimmed = trim(candidate);
    if (!trimmed.empty() && trimmed.back() == ',') trimmed.remove_suffix(1);
    Scanner s{trimmed};
    Turn2Record record;
    if (parse_one_record(s, static_cast<int>(n + 1), record)) continue;
    s.skip_ws();
    if (!s.done()) continue;
    if (!indices.insert(record.index).second) continue;
    answer.records.push_back(std::move(record));
  }
  return answer;
}

std::string render_box(const BBox& box) {
  auto fmt = [](double v) -> std::string {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.1f", v);
      return buf;
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  };
  return "[" + fmt(box.x1) + "," + fmt(box.y1) + "," + fmt(box.x2) + "," + fmt(box.y2) + "]";
}

std::string render_turn1(const Turn1Decision& decision) {
  std::string out;
  for (size_t i = 0; i < decision.detections.size(); ++i) {
    if (i > 0) out += ", ";
    out += decision.detections[i].first.str();
    out += ", ";
    out += render_box(decision.detections[i].second);
  }
  out += " ; ";
  for (size_t i = 0; i < decision.tools.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(decision.tools[i]);
  }
  return out;
}

std::string render_turn2(const Turn2Answer& answer) {
  std::string out;
  for (size_t i = 0; i < answer.records.size(); ++i) {
    const auto& r = answer.records[i];
    if (i > 0) out += ", ";
    out += std::to_string(r.index) + ": " + r.verb.str() + ", " + r.object.str() +
           ", " + render_box(r.human_box) + ", " + render_box(r.object_box);
  }
  return out;
}

HOITriplet Turn2Record::to_triplet() const {
  return HOITriplet{verb, object, human_box, object_box, std::nullopt};
}

std::vector<HOITriplet> Turn2Answer::to_triplets() const {
  std::vector<HOITriplet> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.to_triplet());
  return out;
}

bool check_format(std::string_view turn1_raw, std::string_view turn2_raw) {
  auto env1 = extract_envelope(turn1_raw);
  if (!env1 || !parse_turn1(env1.value().answer)) return false;
  auto env2 = extract_envelope(turn2_raw);
  if (!env2) return false;
  auto answer = parse_turn2(env2.value().answer);
  return answer.ok() || answer.error().kind == ParseErrorKind::EmptyAnswer;
}

}  // namespace hoiagent::protocol
