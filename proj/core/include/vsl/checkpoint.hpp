#pragma once

#include <string>

#include <json.hpp>

#include "vsl/nn.hpp"

namespace vsl {

/// Writes `<stem>.json` (shapes plus caller metadata) and `<stem>.bin`
/// (every weight then bias of every client layer, then every server layer,
/// row-major, little-endian IEEE-754 binary64).
void save_checkpoint(const std::string& dir, const std::string& stem, const SplitModel& model,
                     const nlohmann::json& metadata = nlohmann::json::object());

/// Reads a checkpoint written by save_checkpoint from its JSON manifest path.
SplitModel load_checkpoint(const std::string& manifest_path);

}  // namespace vsl
