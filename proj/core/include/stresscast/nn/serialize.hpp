#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "stresscast/nn/model.hpp"

namespace stresscast::nn {

/// Parameters as JSON: format tag, architecture description and hash,
/// training length and every named tensor. Values round-trip exactly.
nlohmann::json params_to_json(const ModelParams& params);
/// Throws DataError on malformed input or when the stored architecture hash
/// differs from `expected`.
ModelParams params_from_json(const nlohmann::json& j, const Architecture& expected);

void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path, const Architecture& expected = {});

}  // namespace stresscast::nn
