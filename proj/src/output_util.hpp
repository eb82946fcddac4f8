#pragma once

// CSV and manifest helpers shared by the experiment runners.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace apspic::detail {

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(const std::string& s);

std::ofstream open_output(const std::filesystem::path& path);

/// Writes manifest.json with the resolved config, version and status.
void write_manifest(const std::filesystem::path& out_dir, const nlohmann::json& config, const std::string& status,
                    const nlohmann::json& extra = nlohmann::json::object());

}  // namespace apspic::detail
