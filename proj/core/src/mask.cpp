#include "sap/mask.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sap/errors.hpp"

namespace sap {

namespace {

[[noreturn]] void mask_error(const std::string& msg) { throw Error(ErrorCode::kMaskFormat, msg); }

}  // namespace

PruneMask::PruneMask(int layers, int heads_per_layer) : layers_(layers), heads_(heads_per_layer) {
  if (layers < 1 || heads_per_layer < 1) {
    throw Error(ErrorCode::kInvalidArgument, "mask shape must be at least 1x1");
  }
}

void PruneMask::check(HeadId id) const {
  if (id.layer < 0 || id.layer >= layers_ || id.head < 0 || id.head >= heads_) {
    throw Error(ErrorCode::kInvalidArgument, "head " + to_string(id) + " outside " +
                                                 std::to_string(layers_) + "x" + std::to_string(heads_));
  }
}

std::size_t PruneMask::pruned_in_layer(int layer) const {
  return static_cast<std::size_t>(std::distance(pruned_heads_.lower_bound(HeadId{layer, 0}),
                                                pruned_heads_.lower_bound(HeadId{layer + 1, 0})));
}

void PruneMask::prune(HeadId id) {
  check(id);
  pruned_heads_.insert(id);
}

void PruneMask::prune_layer(int layer) {
  check(HeadId{layer, 0});
  for (int h = 0; h < heads_; ++h) pruned_heads_.insert(HeadId{layer, h});
  pruned_layers_.insert(layer);
}

void PruneMask::restore(HeadId id) {
  check(id);
  pruned_heads_.erase(id);
  pruned_layers_.erase(id.layer);
}

std::string write_mask(const PruneMask& mask) {
  nlohmann::json j;
  j["layers"] = mask.layers();
  j["heads_per_layer"] = mask.heads_per_layer();
  auto heads = nlohmann::json::array();
  for (const HeadId& h : mask.pruned_heads()) heads.push_back({h.layer, h.head});
  j["pruned_heads"] = std::move(heads);
  auto layers = nlohmann::json::array();
  for (int l : mask.pruned_layers()) layers.push_back(l);
  j["pruned_layers"] = std::move(layers);
  return j.dump(2) + "\n";
}

void write_mask_file(const PruneMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out << write_mask(mask);
}

PruneMask read_mask(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    mask_error(std::string("invalid mask JSON: ") + e.what());
  }
  try {
    const int layers = j.at("layers").get<int>();
    const int heads = j.at("heads_per_layer").get<int>();
    if (layers < 1 || heads < 1) mask_error("mask shape must be at least 1x1");
    PruneMask mask(layers, heads);
    for (const auto& pair : j.at("pruned_heads")) {
      if (!pair.is_array() || pair.size() != 2) mask_error("pruned_heads entries must be [layer, head]");
      const HeadId id{pair[0].get<int>(), pair[1].get<int>()};
      if (id.layer < 0 || id.layer >= layers || id.head < 0 || id.head >= heads) {
        mask_error("pruned head " + to_string(id) + " out of range");
      }
      mask.prune(id);
    }
    std::set<int> layer_set;
    for (const auto& l : j.at("pruned_layers")) {
      const int layer = l.get<int>();
      if (layer < 0 || layer >= layers) mask_error("pruned layer " + std::to_string(layer) + " out of range");
      if (mask.pruned_in_layer(layer) != static_cast<std::size_t>(heads)) {
        mask_error("layer " + std::to_string(layer) + " marked pruned without all of its heads");
      }
      layer_set.insert(layer);
    }
    for (int layer : layer_set) mask.prune_layer(layer);
    return mask;
  } catch (const nlohmann::json::exception& e) {
    mask_error(std::string("malformed mask: ") + e.what());
  }
}

PruneMask read_mask_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_mask(buf.str());
}

}  // namespace sap
