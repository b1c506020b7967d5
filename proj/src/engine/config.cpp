#include "engine/config.hpp"

#include <cmath>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/tensor_io.hpp"
#include "conditioning/text.hpp"

namespace speakgen::engine {
namespace {

using nlohmann::json;

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  require(obj.is_object(), where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    require(known, "unknown config key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

json section(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json::object(); }

}  // namespace

void EngineConfig::validate() const {
  require(std::isfinite(fps) && fps > 0.0, "fps must be positive");
  require(frames >= 2, "frames must be at least 2");
  require(diffusion_steps >= 1, "diffusion_steps must be at least 1");
  require(target_height > 0.0, "skeleton.target_height must be positive");
  require(contact_speed > 0.0, "contact_speed must be positive");
  (void)axis_map.matrix();
  for (const auto& f : feet) require(!f.empty(), "skeleton.feet entries must be joint names");
  audio_layout.validate();
  denoiser_config(1).validate();
  require(frames <= max_len, "frames exceeds model.max_len");
  require(train_steps >= 1, "train.steps must be at least 1");
  require(batch_size >= 1, "train.batch_size must be at least 1");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "train.learning_rate must be non-negative");
  require(mask_probability >= 0.0 && mask_probability <= 1.0, "train.mask_probability must lie in [0, 1]");
  require(loss.huber_delta > 0.0, "train.huber_delta must be positive");
  for (double w : dataset_weights) require(std::isfinite(w) && w >= 0.0, "train.dataset_weights must be non-negative");
  require(log_every >= 1, "train.log_every must be at least 1");
  doubletake.validate(diffusion_steps);
}

motion::FeatureOptions EngineConfig::feature_options() const {
  motion::FeatureOptions o;
  o.feet.names = feet;
  o.contact_speed = contact_speed;
  o.fps = fps;
  return o;
}

denoiser::DenoiserConfig EngineConfig::denoiser_config(int feature_dim) const {
  denoiser::DenoiserConfig c;
  c.feature_dim = feature_dim;
  c.audio_dim = audio_layout.total();
  c.text_dim = conditioning::kTextEmbeddingDim;
  c.hidden_dim = hidden_dim;
  c.layers = layers;
  c.heads = heads;
  c.ff_mult = ff_mult;
  c.max_len = max_len;
  c.diffusion_steps = diffusion_steps;
  c.positional_encoding = positional_encoding;
  return c;
}

denoiser::TrainConfig EngineConfig::train_config() const {
  denoiser::TrainConfig c;
  c.steps = train_steps;
  c.batch_size = batch_size;
  c.mask_probability = mask_probability;
  c.loss = loss;
  c.optimizer.learning_rate = learning_rate;
  return c;
}

json to_json(const EngineConfig& c) {
  json j;
  j["fps"] = c.fps;
  j["frames"] = c.frames;
  j["diffusion_steps"] = c.diffusion_steps;
  j["contact_speed"] = c.contact_speed;
  j["skeleton"] = {{"target_height", c.target_height},
                   {"axis_map", c.axis_map.axes},
                   {"feet", c.feet}};
  j["audio_layout"] = {{"mfcc", c.audio_layout.mfcc},   {"mel", c.audio_layout.mel},
                       {"pitch", c.audio_layout.pitch}, {"energy", c.audio_layout.energy},
                       {"onsets", c.audio_layout.onsets}, {"external", c.audio_layout.external}};
  j["model"] = {{"hidden_dim", c.hidden_dim}, {"layers", c.layers},   {"heads", c.heads},
                {"ff_mult", c.ff_mult},       {"max_len", c.max_len}, {"positional_encoding", c.positional_encoding}};
  j["train"] = {{"steps", c.train_steps},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"mask_probability", c.mask_probability},
                {"loss", diffusion::loss_kind_name(c.loss.kind)},
                {"huber_delta", c.loss.huber_delta},
                {"dataset_weights", c.dataset_weights},
                {"log_every", c.log_every}};
  j["doubletake"] = {{"handshake", c.doubletake.handshake},   {"blend", c.doubletake.blend},
                     {"hard_max", c.doubletake.hard_max},     {"soft_min", c.doubletake.soft_min},
                     {"refine_steps", c.doubletake.refine_steps}, {"context", c.doubletake.context}};
  return j;
}

EngineConfig config_from_json(const json& j) {
  EngineConfig c;
  try {
    reject_unknown(j, "", {"fps", "frames", "diffusion_steps", "contact_speed", "skeleton", "audio_layout", "model",
                           "train", "doubletake"});
    read(j, "fps", c.fps);
    read(j, "frames", c.frames);
    read(j, "diffusion_steps", c.diffusion_steps);
    read(j, "contact_speed", c.contact_speed);

    const json sk = section(j, "skeleton");
    reject_unknown(sk, "skeleton", {"target_height", "axis_map", "feet"});
    read(sk, "target_height", c.target_height);
    read(sk, "axis_map", c.axis_map.axes);
    read(sk, "feet", c.feet);

    const json al = section(j, "audio_layout");
    reject_unknown(al, "audio_layout", {"mfcc", "mel", "pitch", "energy", "onsets", "external"});
    read(al, "mfcc", c.audio_layout.mfcc);
    read(al, "mel", c.audio_layout.mel);
    read(al, "pitch", c.audio_layout.pitch);
    read(al, "energy", c.audio_layout.energy);
    read(al, "onsets", c.audio_layout.onsets);
    read(al, "external", c.audio_layout.external);

    const json m = section(j, "model");
    reject_unknown(m, "model", {"hidden_dim", "layers", "heads", "ff_mult", "max_len", "positional_encoding"});
    read(m, "hidden_dim", c.hidden_dim);
    read(m, "layers", c.layers);
    read(m, "heads", c.heads);
    read(m, "ff_mult", c.ff_mult);
    read(m, "max_len", c.max_len);
    read(m, "positional_encoding", c.positional_encoding);

    const json t = section(j, "train");
    reject_unknown(t, "train", {"steps", "batch_size", "learning_rate", "mask_probability", "loss", "huber_delta",
                                "dataset_weights", "log_every"});
    read(t, "steps", c.train_steps);
    read(t, "batch_size", c.batch_size);
    read(t, "learning_rate", c.learning_rate);
    read(t, "mask_probability", c.mask_probability);
    if (t.contains("loss")) c.loss.kind = diffusion::parse_loss_kind(t.at("loss").get<std::string>());
    read(t, "huber_delta", c.loss.huber_delta);
    read(t, "dataset_weights", c.dataset_weights);
    read(t, "log_every", c.log_every);

    const json d = section(j, "doubletake");
    reject_unknown(d, "doubletake", {"handshake", "blend", "hard_max", "soft_min", "refine_steps", "context"});
    read(d, "handshake", c.doubletake.handshake);
    read(d, "blend", c.doubletake.blend);
    read(d, "hard_max", c.doubletake.hard_max);
    read(d, "soft_min", c.doubletake.soft_min);
    read(d, "refine_steps", c.doubletake.refine_steps);
    read(d, "context", c.doubletake.context);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

EngineConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file_bytes(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &j;
  std::size_t begin = 0;
  while (true) {
    const auto dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    require(!part.empty(), "override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    require(node->is_object(), "override key '" + key + "' descends into a non-object");
    begin = dot + 1;
  }
}

std::string config_digest(const EngineConfig& config) { return sha256_hex(to_json(config).dump()); }

json skeleton_to_json(const motion::Skeleton& skeleton) {
  json joints = json::array();
  for (const auto& jt : skeleton.joints()) {
    json e = {{"name", jt.name},
              {"parent", jt.parent},
              {"offset", {jt.offset.x(), jt.offset.y(), jt.offset.z()}}};
    if (jt.end_site) e["end_site"] = {jt.end_site->x(), jt.end_site->y(), jt.end_site->z()};
    joints.push_back(std::move(e));
  }
  return joints;
}

motion::Skeleton skeleton_from_json(const json& j) {
  std::vector<motion::Joint> joints;
  try {
    for (const auto& e : j) {
      motion::Joint jt;
      jt.name = e.at("name").get<std::string>();
      jt.parent = e.at("parent").get<int>();
      const auto o = e.at("offset").get<std::array<double, 3>>();
      jt.offset = Eigen::Vector3d(o[0], o[1], o[2]);
      if (e.contains("end_site")) {
        const auto s = e.at("end_site").get<std::array<double, 3>>();
        jt.end_site = Eigen::Vector3d(s[0], s[1], s[2]);
      }
      joints.push_back(std::move(jt));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("skeleton: ") + e.what());
  }
  return motion::Skeleton(std::move(joints));
}

}  // namespace speakgen::engine
