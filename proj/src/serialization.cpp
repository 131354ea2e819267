#include "hoiagent/serialization.hpp"

#include <fstream>

namespace hoiagent::protocol {

void to_json(nlohmann::json& j, const ToolKind& k) { j = to_string(k); }

void from_json(const nlohmann::json& j, ToolKind& k) {
  auto parsed = tool_from_string(j.get<std::string>());
  if (!parsed) throw DataError("unknown tool '" + j.get<std::string>() + "'");
  k = *parsed;
}

void to_json(nlohmann::json& j, const Turn1Decision& d) {
  nlohmann::json detections = nlohmann::json::array();
  for (const auto& [label, box] : d.detections) {
    detections.push_back({{"label", label}, {"box", box}});
  }
  j = nlohmann::json{{"detections", detections}, {"tools", d.tools}};
}

void from_json(const nlohmann::json& j, Turn1Decision& d) {
  d.detections.clear();
  for (const auto& item : j.at("detections")) {
    d.detections.emplace_back(item.at("label").get<EntityLabel>(),
                              item.at("box").get<BBox>());
  }
  d.tools = j.value("tools", std::vector<ToolKind>{});
}

void to_json(nlohmann::json& j, const Turn2Record& r) {
  j = nlohmann::json{{"index", r.index},
                     {"verb", r.verb},
                     {"object", r.object},
                     {"human_box", r.human_box},
                     {"object_box", r.object_box}};
}

void from_json(const nlohmann::json& j, Turn2Record& r) {
  j.at("index").get_to(r.index);
  j.at("verb").get_to(r.verb);
  j.at("object").get_to(r.object);
  j.at("human_box").get_to(r.human_box);
  j.at("object_box").get_to(r.object_box);
}

void to_json(nlohmann::json& j, const Turn2Answer& a) {
  j = nlohmann::json{{"records", a.records}};
}

void from_json(const nlohmann::json& j, Turn2Answer& a) {
  a.records = j.value("records", std::vector<Turn2Record>{});
}

}  // namespace hoiagent::protocol

namespace hoiagent::reward {

void to_json(nlohmann::json& j, const Matching& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [p, g] : m.pairs) pairs.push_back({p, g});
  j = nlohmann::json{{"pairs", pairs}, {"tp", m.tp}};
}

void from_json(const nlohmann::json& j, Matching& m) {
  m.pairs.clear();
  for (const auto& pair : j.at("pairs")) {
    m.pairs.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  }
  j.at("tp").get_to(m.tp);
}

void to_json(nlohmann::json& j, const RewardBreakdown& b) {
  j = nlohmann::json{{"r_hoi", b.r_hoi},
                     {"r_format", b.r_format},
                     {"r_tool", b.r_tool},
                     {"total", b.total},
                     {"precision", b.precision},
                     {"recall", b.recall},
                     {"matching", b.matching},
                     {"format_ok", b.format_ok},
                     {"n_pred", b.n_pred},
                     {"n_gt", b.n_gt}};
}

void from_json(const nlohmann::json& j, RewardBreakdown& b) {
  j.at("r_hoi").get_to(b.r_hoi);
  j.at("r_format").get_to(b.r_format);
  j.at("r_tool").get_to(b.r_tool);
  j.at("total").get_to(b.total);
  j.at("precision").get_to(b.precision);
  j.at("recall").get_to(b.recall);
  b.matching = j.value("matching", Matching{});
  b.format_ok = j.value("format_ok", false);
  b.n_pred = j.value("n_pred", 0);
  b.n_gt = j.value("n_gt", 0);
}

}  // namespace hoiagent::reward

namespace hoiagent {

void to_json(nlohmann::json& j, const BBox& b) {
  j = nlohmann::json::array({b.x1, b.y1, b.x2, b.y2});
}

void from_json(const nlohmann::json& j, BBox& b) {
  if (!j.is_array() || j.size() != 4) {
    throw DataError("box must be a 4-element array");
  }
  b = BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
           j[3].get<double>()};
  if (!valid_box(b)) {
    throw DataError("box " + j.dump() + " violates x1<=x2, y1<=y2, coords>=0");
  }
}

void to_json(nlohmann::json& j, const EntityLabel& l) { j = l.str(); }

void from_json(const nlohmann::json& j, EntityLabel& l) {
  auto parsed = EntityLabel::parse(j.get<std::string>());
  if (!parsed) throw DataError("label '" + j.get<std::string>() + "' is empty after normalization");
  l = *parsed;
}

void to_json(nlohmann::json& j, const HOITriplet& t) {
  j = nlohmann::json{{"verb", t.verb},
                     {"object", t.object},
                     {"human_box", t.human_box},
                     {"object_box", t.object_box}};
  if (t.score) j["score"] = *t.score;
}

void from_json(const nlohmann::json& j, HOITriplet& t) {
  j.at("verb").get_to(t.verb);
  j.at("object").get_to(t.object);
  j.at("human_box").get_to(t.human_box);
  j.at("object_box").get_to(t.object_box);
  t.score.reset();
  if (j.contains("score") && !j["score"].is_null()) {
    double s = j["score"].get<double>();
    if (s < 0.0 || s > 1.0) {
      throw DataError("score " + std::to_string(s) + " is outside [0,1]");
    }
    t.score = s;
  }
}

void to_json(nlohmann::json& j, const ImageRecord& r) {
  j = nlohmann::json{{"image_id", r.image_id},
                     {"width", r.width},
                     {"height", r.height},
                     {"ground_truth", r.ground_truth},
                     {"predictions", r.predictions}};
}

void from_json(const nlohmann::json& j, ImageRecord& r) {
  j.at("image_id").get_to(r.image_id);
  j.at("width").get_to(r.width);
  j.at("height").get_to(r.height);
  r.ground_truth = j.value("ground_truth", std::vector<HOITriplet>{});
  r.predictions = j.value("predictions", std::vector<HOITriplet>{});
  validate_record(r);
}

void validate_record(const ImageRecord& record) {
  if (record.width <= 0.0 || record.height <= 0.0) {
    throw DataError("image '" + record.image_id + "': non-positive dimensions");
  }
  auto check = [&](const std::vector<HOITriplet>& triplets, const char* kind) {
    for (size_t i = 0; i < triplets.size(); ++i) {
      for (const BBox* b : {&triplets[i].human_box, &triplets[i].object_box}) {
        if (!valid_box(*b) || b->x2 > record.width || b->y2 > record.height) {
          throw DataError("image '" + record.image_id + "': " + kind + " triplet " +
                          std::to_string(i) + " has a box outside the image frame");
        }
      }
      if (triplets[i].score && (*triplets[i].score < 0.0 || *triplets[i].score > 1.0)) {
        throw DataError("image '" + record.image_id + "': " + kind + " triplet " +
                        std::to_string(i) + " score outside [0,1]");
      }
    }
  };
  check(record.ground_truth, "ground-truth");
  check(record.predictions, "prediction");
}

template <typename T>
std::vector<T> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_jsonl<T>(in, path);
}

template std::vector<ImageRecord> read_jsonl_file<ImageRecord>(const std::string&);
template std::vector<nlohmann::json> read_jsonl_file<nlohmann::json>(const std::string&);

std::vector<ImageRecord> read_image_records(const std::string& path) {
  return read_jsonl_file<ImageRecord>(path);
}

}  // namespace hoiagent
