#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dcj/model.hpp"

namespace dcj {

struct LoadedModel {
    ModelSpec spec;
    nlohmann::json canonical;  // normalized config document
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 1;
    NetworkState init;         // from "init" or the canonical start state
};

/// Parses, schema-checks and materializes a model configuration.
/// Throws ParseError / SchemaError / BadParameter with the offending field.
LoadedModel load_model(const std::string& path);
LoadedModel load_model_json(const nlohmann::json& doc);

std::uint64_t fnv1a64(const std::string& s);

} // namespace dcj
