#include "stresscast/nn/serialize.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace stresscast::nn {

namespace {
constexpr const char* kFormat = "stresscast-params";
constexpr int kVersion = 1;
}  // namespace

nlohmann::json params_to_json(const ModelParams& params) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["architecture"] = params.architecture().describe();
  j["architecture_hash"] = fmt::format("{:016x}", params.architecture().hash());
  j["input_length"] = params.input_length;
  auto& tensors = j["tensors"] = nlohmann::json::array();
  const auto names = params.tensor_names();
  const auto ptrs = params.all_tensors();
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    tensors.push_back({{"name", names[i]}, {"shape", ptrs[i]->shape()}, {"values", ptrs[i]->values()}});
  }
  return j;
}

ModelParams params_from_json(const nlohmann::json& j, const Architecture& expected) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("not a parameter file");
    if (j.at("version").get<int>() != kVersion) throw DataError("unsupported parameter file version");
    const auto hash = fmt::format("{:016x}", expected.hash());
    if (j.at("architecture_hash").get<std::string>() != hash) {
      throw DataError("architecture mismatch: file has " + j.at("architecture").get<std::string>() + ", expected " +
                      expected.describe());
    }
    ModelParams params = make_params_shell(expected);
    params.input_length = j.at("input_length").get<std::size_t>();
    const auto names = params.tensor_names();
    auto ptrs = params.all_tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != ptrs.size()) throw DataError("parameter file has the wrong number of tensors");
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      const auto& t = tensors.at(i);
      if (t.at("name").get<std::string>() != names[i]) throw DataError("unexpected tensor " + t.at("name").dump());
      auto shape = t.at("shape").get<std::vector<std::size_t>>();
      auto values = t.at("values").get<std::vector<double>>();
      if (shape != ptrs[i]->shape() || values.size() != ptrs[i]->size()) {
        throw DataError("tensor " + names[i] + " has the wrong shape");
      }
      *ptrs[i] = Tensor(std::move(shape), std::move(values));
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  }
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << params_to_json(params).dump() << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

ModelParams load_params(const std::filesystem::path& path, const Architecture& expected) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
  return params_from_json(j, expected);
}

}  // namespace stresscast::nn
