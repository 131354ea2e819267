#pragma once

#include <json.hpp>

#include "hoiagent/protocol.hpp"
#include "hoiagent/records.hpp"
#include "hoiagent/reward.hpp"
#include "hoiagent/vocabulary.hpp"

namespace hoiagent::protocol {

void to_json(nlohmann::json& j, const ToolKind& k);
void from_json(const nlohmann::json& j, ToolKind& k);

void to_json(nlohmann::json& j, const Turn1Decision& d);
void from_json(const nlohmann::json& j, Turn1Decision& d);

void to_json(nlohmann::json& j, const Turn2Record& r);
void from_json(const nlohmann::json& j, Turn2Record& r);

void to_json(nlohmann::json& j, const Turn2Answer& a);
void from_json(const nlohmann::json& j, Turn2Answer& a);

}  // namespace hoiagent::protocol

namespace hoiagent::reward {

void to_json(nlohmann::json& j, const Matching& m);
void from_json(const nlohmann::json& j, Matching& m);

void to_json(nlohmann::json& j, const RewardBreakdown& b);
void from_json(const nlohmann::json& j, RewardBreakdown& b);

}  // namespace hoiagent::reward

namespace hoiagent {

// BBox travels as a 4-element array [x1,y1,x2,y2].
void to_json(nlohmann::json& j, const BBox& b);
void from_json(const nlohmann::json& j, BBox& b);

void to_json(nlohmann::json& j, const EntityLabel& l);
void from_json(const nlohmann::json& j, EntityLabel& l);

void to_json(nlohmann::json& j, const HOITriplet& t);
void from_json(const nlohmann::json& j, HOITriplet& t);

void to_json(nlohmann::json& j, const ImageRecord& r);
void from_json(const nlohmann::json& j, ImageRecord& r);

/// Reads a line-delimited JSON file, one value of T per line. Blank lines
/// are skipped. Errors carry the 1-based line number.
template <typename T>
std::vector<T> read_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<T> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<T>());
    } catch (const std::exception& e) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::vector<T> read_jsonl_file(const std::string& path);

std::vector<ImageRecord> read_image_records(const std::string& path);

}  // namespace hoiagent
