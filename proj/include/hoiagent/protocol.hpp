#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hoiagent/geometry.hpp"
#include "hoiagent/labels.hpp"
#include "hoiagent/records.hpp"

namespace hoiagent::protocol {

/// The five tools a Turn-1 answer may select. `image_description` is an
/// accepted input spelling for scene_explanation; rendering always emits
/// `scene_explanation`.
enum class ToolKind {
  image_crop,
  outpaint,
  viewpoint_transform,
  action_description,
  scene_explanation,
};

std::string to_string(ToolKind kind);
std::optional<ToolKind> tool_from_string(std::string_view name);
const std::vector<ToolKind>& all_tool_kinds();

enum class ParseErrorKind {
  MissingBlock,
  DuplicateBlock,
  UnclosedBlock,
  StrayText,
  MissingSeparator,
  MultipleSeparators,
  MalformedBox,
  UnknownTool,
  DanglingLabel,
  UnexpectedToken,
  MalformedRecord,
  DuplicateIndex,
  EmptyAnswer,
};

std::string to_string(ParseErrorKind kind);

struct ParseError {
  ParseError(ParseErrorKind kind_, std::string message_ = {},
             std::string subject_ = {}, int record_ordinal_ = 0)
      : kind(kind_), message(std::move(message_)), subject(std::move(subject_)),
        record_ordinal(record_ordinal_) {}

  ParseErrorKind kind;
  std::string message;
  /// Which block or token the error refers to ("think", "answer", a tool
  /// name, ...). Empty when not applicable.
  std::string subject;
  /// 1-based record ordinal for Turn-2 record errors; 0 otherwise.
  int record_ordinal = 0;

  std::string describe() const;
};

/// Value-or-typed-error result of a parse. Parsing never throws.
template <typename T>
class ParseResult {
 public:
  ParseResult(T value) : state_(std::move(value)) {}
  ParseResult(ParseError error) : state_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const ParseError& error() const { return std::get<ParseError>(state_); }

 private:
  std::variant<T, ParseError> state_;
};

/// Inner texts of the single <think> and <answer> blocks.
struct Envelope {
  std::string think;
  std::string answer;

  bool operator==(const Envelope&) const = default;
};

/// Parsed Turn-1 answer: detected objects with boxes, then selected tools.
struct Turn1Decision {
  std::vector<std::pair<EntityLabel, BBox>> detections;
  std::vector<ToolKind> tools;  // duplicates removed, first occurrence wins

  bool operator==(const Turn1Decision&) const = default;
};

/// One Turn-2 record: `idx: verb, object, [human box], [object box]`.
struct Turn2Record {
  int index = 0;
  EntityLabel verb;
  EntityLabel object;
  BBox human_box;
  BBox object_box;

  bool operator==(const Turn2Record&) const = default;

  HOITriplet to_triplet() const;
};

struct Turn2Answer {
  std::vector<Turn2Record> records;

  bool operator==(const Turn2Answer&) const = default;

  std::vector<HOITriplet> to_triplets() const;
};

/// Extracts the single think/answer pair. The input must consist of exactly
/// one block of each kind, in either order, with nothing but whitespace
/// outside them.
ParseResult<Envelope> extract_envelope(std::string_view raw);

/// Parses `label, [x1,y1,x2,y2], ... ; tool_1, tool_2, ...`. Exactly one
/// `;` splits detections from tools; either segment may be empty. Unknown
/// tool names are rejected; duplicate tools are dropped, keeping order.
ParseResult<Turn1Decision> parse_turn1(std::string_view answer_text);

/// Parses a comma-separated list of `idx: verb, object, [4 nums], [4 nums]`
/// records. All-or-nothing: the first malformed record fails the parse.
/// A whitespace-only answer yields the distinct EmptyAnswer signal.
ParseResult<Turn2Answer> parse_turn2(std::string_view answer_text);

/// Best-effort variant: keeps every well-formed record, skips malformed
/// ones and duplicate indices (first occurrence wins).
Turn2Answer parse_turn2_salvage(std::string_view answer_text);

std::string render_turn1(const Turn1Decision& decision);
std::string render_turn2(const Turn2Answer& answer);
std::string render_box(const BBox& box);

/// True iff both raw turns carry well-formed envelopes, the Turn-1 answer
/// parses, and the Turn-2 answer parses or is the empty-answer signal.
bool check_format(std::string_view turn1_raw, std::string_view turn2_raw);

}  // namespace hoiagent::protocol
