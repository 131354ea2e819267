#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hoiagent/protocol.hpp"
#include "hoiagent/vocabulary.hpp"

namespace hoiagent::agent {

/// Fixed prompt templates for the two turns. The wording is part of the
/// replay contract: identical inputs must produce identical prompt strings.

/// Turn-1 instruction: detect objects from the closed vocabulary and select
/// tools. `query_text` is the caller's question (empty selects the standard
/// one).
std::string build_turn1_instruction(const Vocabulary& vocabulary,
                                    const std::string& query_text);

/// Governance preamble emitted before every generatively imagined image.
std::string supplementary_image_notice();

/// Mandatory instruction that bounding boxes are always read off the
/// original image, never an auxiliary one.
std::string coordinate_source_notice();

/// Turn-2 instruction: detected objects, their valid actions, textual tool
/// evidence, and the answer grammar.
std::string build_turn2_instruction(
    const std::optional<protocol::Turn1Decision>& turn1,
    const Vocabulary& vocabulary,
    const std::vector<std::string>& evidence_texts,
    const std::string& query_text);

}  // namespace hoiagent::agent
