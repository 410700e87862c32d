// Subcommand drivers shared by the C API and the CLI: config defaults and
// validation, result assembly, artifact export.
#pragma once

#include <string>

#include <json.hpp>

namespace cylperc {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// every key the command accepts, with its default; `seed` has none
json default_config();
// defaults overlaid with `user`; field-path messages on unknown keys or wrong types
json merge_config(const json& user);
// full report; artifacts go to config["out"] when it is non-empty
json run_command(const std::string& command, const json& user_config);

} // namespace cylperc
