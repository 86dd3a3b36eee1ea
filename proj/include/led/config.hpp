#pragma once

#include <filesystem>

#include <json.hpp>

#include "led/detector.hpp"
#include "led/injector.hpp"

namespace led {

/// Detector and injection settings resolved from defaults, an optional JSON
/// config file (flat object, keys named after the config fields) and
/// command-line overrides applied by the caller.
struct ResolvedConfig {
    DetectorConfig detector;
    InjectionConfig injection;
    bool seed_from_file = false;
};

/// Applies the keys of `j` over `base`. Unknown keys and ill-typed values
/// throw ValidationError.
ResolvedConfig apply_config(const nlohmann::json& j, ResolvedConfig base = {});
ResolvedConfig load_config(const std::filesystem::path& path, ResolvedConfig base = {});

nlohmann::json to_json(const DetectorConfig& cfg);
nlohmann::json to_json(const InjectionConfig& cfg);
/// Flat snapshot with every key, suitable for feeding back to load_config.
nlohmann::json to_json(const ResolvedConfig& cfg);

}  // namespace led
