#include "kanppo/checkpoint.hpp"

#include <utility>

#include "json.hpp"
#include "kanppo/errors.hpp"
#include "kanppo/io.hpp"

namespace kanppo {

namespace {
constexpr const char* kFormat = "kanppo-checkpoint-v1";

using nlohmann::json;

json keep_masks(const std::vector<Layer>& stack) {
  json masks = json::object();
  for (std::size_t l = 0; l < stack.size(); ++l) {
    if (const auto* kan = std::get_if<KanLayer>(&stack[l])) {
      masks[std::to_string(l)] = json(kan->keep);
    }
  }
  return masks;
}

void restore_keep(std::vector<Layer>& stack, const json& masks) {
  for (auto& [key, value] : masks.items()) {
    const std::size_t l = std::stoul(key);
    if (l >= stack.size() || !std::holds_alternative<KanLayer>(stack[l])) {
      throw ConfigError("checkpoint: keep mask for non-KAN layer " + key);
    }
    auto& layer = std::get<KanLayer>(stack[l]);
    const auto mask = value.get<std::vector<std::uint8_t>>();
    if (mask.size() != layer.keep.size()) {
      throw ConfigError("checkpoint: keep mask size mismatch at layer " + key);
    }
    layer.keep = mask;
  }
}
}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["format"] = kFormat;
  j["env"] = ckpt.env_name;
  j["arch"] = std::string(arch_name(ckpt.net.spec.arch));
  j["k"] = ckpt.net.spec.k;
  j["g"] = ckpt.net.spec.g;
  j["hidden"] = ckpt.net.spec.hidden;
  j["obs_dim"] = ckpt.net.obs_dim;
  j["act_dim"] = ckpt.net.act_dim;

  json params = json::object();
  const ParamStore& store = ckpt.net.params;
  for (std::size_t i = 0; i < store.slice_count(); ++i) {
    const ParamSlice& s = store.slice(i);
    const auto vals = store.values(i);
    params[s.name] = std::vector<double>(vals.begin(), vals.end());
  }
  j["params"] = std::move(params);
  j["keep"] = {{"actor", keep_masks(ckpt.net.actor)},
               {"critic", keep_masks(ckpt.net.critic)}};
  j["normalizer"] = {{"mean", ckpt.normalizer.mean_vec()},
                     {"m2", ckpt.normalizer.m2_vec()},
                     {"count", ckpt.normalizer.count()},
                     {"clip", ckpt.normalizer.clip()},
                     {"frozen", ckpt.normalizer.frozen()},
                     {"enabled", ckpt.normalizer.enabled()}};
  return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw ConfigError("checkpoint: unknown format tag");
    }
    Checkpoint ckpt;
    ckpt.env_name = j.at("env").get<std::string>();
    NetworkSpec spec;
    spec.arch = arch_from_string(j.at("arch").get<std::string>());
    spec.k = j.at("k").get<int>();
    spec.g = j.at("g").get<int>();
    spec.hidden = j.at("hidden").get<int>();
    const int obs_dim = j.at("obs_dim").get<int>();
    const int act_dim = j.at("act_dim").get<int>();

    Rng rng(0);  // layout only; every value is overwritten below
    ckpt.net = build_network(spec, obs_dim, act_dim, rng);

    const json& params = j.at("params");
    ParamStore& store = ckpt.net.params;
    for (std::size_t i = 0; i < store.slice_count(); ++i) {
      const ParamSlice& s = store.slice(i);
      if (!params.contains(s.name)) {
        throw ConfigError("checkpoint: missing parameter slice '" + s.name + "'");
      }
      const auto vals = params.at(s.name).get<std::vector<double>>();
      if (vals.size() != s.length) {
        throw ConfigError("checkpoint: size mismatch for slice '" + s.name + "'");
      }
      std::copy(vals.begin(), vals.end(), store.values(i).begin());
    }
    restore_keep(ckpt.net.actor, j.at("keep").at("actor"));
    restore_keep(ckpt.net.critic, j.at("keep").at("critic"));

    const json& n = j.at("normalizer");
    ckpt.normalizer.restore(n.at("mean").get<std::vector<double>>(),
                            n.at("m2").get<std::vector<double>>(),
                            n.at("count").get<std::uint64_t>(),
                            n.at("clip").get<double>(), n.at("frozen").get<bool>(),
                            n.at("enabled").get<bool>());
    if (ckpt.normalizer.dim() != obs_dim) {
      throw ConfigError("checkpoint: normalizer dimension mismatch");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed field: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  atomic_write_text(path, checkpoint_to_json(ckpt) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace kanppo
