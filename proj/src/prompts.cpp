#include "hoiagent/prompts.hpp"

namespace hoiagent::agent {

namespace {

constexpr const char* kDefaultQuery =
    "Identify every human-object interaction in the image.";

}  // namespace

std::string build_turn1_instruction(const Vocabulary& vocabulary,
                                    const std::string& query_text) {
  std::string out;
  out += "TASK: ";
  out += query_text.empty() ? kDefaultQuery : query_text.c_str();
  out += "\n\nStep 1 of 2: perception and tool selection.\n";
  out += "Detect every visible object instance that belongs to the object list below "
         "and give its bounding box in pixel coordinates of this image.\n";
  out += "OBJECT LIST: ";
  bool first = true;
  for (const auto& object : vocabulary.objects()) {
    if (!first) out += ", ";
    out += object.str();
    first = false;
  }
  out += "\n\nThen decide which tools, if any, would help resolve ambiguous "
         "interactions:\n";
  out += "- image_crop: inspect a high-resolution sub-region around a candidate pair\n";
  out += "- outpaint: extend the scene beyond the frame to recover cut-off context\n";
  out += "- viewpoint_transform: synthesize an alternative view of an occluded area\n";
  out += "- action_description: retrieve precise definitions of candidate actions\n";
  out += "- scene_explanation: retrieve a high-level description of the scene\n";
  out += "\nReply with your reasoning wrapped in <think></think> and your decision "
         "wrapped in <answer></answer>. The answer line must follow exactly:\n";
  out += "object_1, [ox1,oy1,ox2,oy2], object_2, [ox1,oy1,ox2,oy2], ... ; tool_1, tool_2\n";
  out += "Use ' ; ' with an empty right side when no tool is needed.";
  return out;
}

std::string supplementary_image_notice() {
  return "NOTE ON THE NEXT IMAGE: it was synthesized to help disambiguate actions. "
         "Treat it as a visual hint only; it must not introduce objects or people "
         "that the original image does not support, and it never provides "
         "coordinates.";
}

std::string coordinate_source_notice() {
  return "All bounding box coordinates must be taken from the ORIGINAL image. "
         "Auxiliary images never supply coordinates.";
}

std::string build_turn2_instruction(
    const std::optional<protocol::Turn1Decision>& turn1,
    const Vocabulary& vocabulary,
    const std::vector<std::string>& evidence_texts,
    const std::string& query_text) {
  std::string out;
  out += "TASK: ";
  out += query_text.empty() ? kDefaultQuery : query_text.c_str();
  out += "\n\nStep 2 of 2: cognition.\n";

  out += "DETECTED OBJECTS:\n";
  if (turn1 && !turn1->detections.empty()) {
    for (const auto& [label, box] : turn1->detections) {
      out += "- " + label.str() + " " + protocol::render_box(box) + "\n";
    }
  } else {
    out += "- (none)\n";
  }

  out += "\nVALID ACTIONS (verbs are only legal for the object they are listed "
         "under):\n";
  bool any_actions = false;
  if (turn1) {
    for (const auto& [label, box] : turn1->detections) {
      (void)box;
      auto it = vocabulary.object_to_verbs().find(label);
      if (it == vocabulary.object_to_verbs().end()) continue;
      out += "- " + label.str() + ": ";
      bool first = true;
      for (const auto& verb : it->second) {
        if (!first) out += ", ";
        out += verb.str();
        first = false;
      }
      out += "\n";
      any_actions = true;
    }
  }
  if (!any_actions) out += "- (none)\n";

  if (!evidence_texts.empty()) {
    out += "\nTOOL EVIDENCE:\n";
    for (const auto& text : evidence_texts) out += "- " + text + "\n";
  }

  out += "\n";
  out += coordinate_source_notice();
  out += "\n\nInside <think>, follow this structure: (1) list every person and "
         "object with its box, (2) pair every person with every object, (3) check "
         "each pair against its valid verbs using the visual evidence, (4) review "
         "and compile the final set.\n";
  out += "Inside <answer>, emit the interactions as a comma-separated list of "
         "records, each exactly:\n";
  out += "idx: action, object, [px1,py1,px2,py2], [ox1,oy1,ox2,oy2]\n";
  out += "Leave the answer empty if there is no interaction.";
  return out;
}

}  // namespace hoiagent::agent
