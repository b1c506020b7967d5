#include "engine/checkpoint.hpp"

#include <cstring>
#include <sstream>

#include "common/error.hpp"
#include "common/tensor_io.hpp"

namespace speakgen::engine {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw ValidationError("checkpoint: truncated header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<T>(v);
}

const char* const kNormNames[] = {"norm.motion.mean", "norm.motion.std", "norm.audio.mean", "norm.audio.std"};

// Normalizers first (no parameter slot), then the network in its own order.
std::vector<std::pair<std::string, Eigen::MatrixXd*>> all_tensors(Model& m) {
  auto list = m.params.tensors();
  for (int i = 3; i >= 0; --i) list.insert(list.begin(), {kNormNames[i], nullptr});
  return list;
}

}  // namespace

std::string encode_model(const Model& model) {
  json manifest;
  manifest["format"] = "speakgen-checkpoint";
  manifest["config"] = to_json(model.config);
  manifest["config_digest"] = config_digest(model.config);
  manifest["seed"] = model.seed;
  manifest["feature_dim"] = model.params.config.feature_dim;
  manifest["skeleton"] = skeleton_to_json(model.skeleton);
  manifest["training"] = model.training;
  json names = json::array();
  for (const char* n : kNormNames) names.push_back(n);
  for (const auto& [name, _] : model.params.tensors()) names.push_back(name);
  manifest["tensors"] = names;
  const std::string text = manifest.dump();

  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const Eigen::RowVectorXd* norms[] = {&model.motion_norm.mean, &model.motion_norm.std, &model.audio_norm.mean,
                                       &model.audio_norm.std};
  for (const auto* n : norms) write_tensor(out, tensor_from_matrix(Eigen::MatrixXd(*n)));
  for (const auto& [name, t] : model.params.tensors()) write_tensor(out, tensor_from_matrix(*t));
  return out.str();
}

Model decode_model(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ValidationError("checkpoint: bad magic");
  const auto version = take<std::uint32_t>(in);
  require(version == kCheckpointVersion, "checkpoint: unsupported version " + std::to_string(version));
  const auto length = take<std::uint64_t>(in);
  require(length <= bytes.size(), "checkpoint: manifest length exceeds file size");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw ValidationError("checkpoint: truncated manifest");

  Model m;
  json manifest;
  try {
    manifest = json::parse(text);
    require(manifest.at("format") == "speakgen-checkpoint", "checkpoint: unexpected format tag");
    m.config = config_from_json(manifest.at("config"));
    m.seed = manifest.at("seed").get<std::uint64_t>();
    m.skeleton = skeleton_from_json(manifest.at("skeleton"));
    m.training = manifest.value("training", json::object());
    const int feature_dim = manifest.at("feature_dim").get<int>();
    Rng unused(0);
    m.params = denoiser::DenoiserParams::initialize(m.config.denoiser_config(feature_dim), unused);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint manifest: ") + e.what());
  }

  auto expect = all_tensors(m);
  const auto& names = manifest.at("tensors");
  require(names.size() == expect.size(), "checkpoint: tensor count does not match the model config");
  Eigen::RowVectorXd* norms[] = {&m.motion_norm.mean, &m.motion_norm.std, &m.audio_norm.mean, &m.audio_norm.std};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    require(names[i].get<std::string>() == expect[i].first,
            "checkpoint: expected tensor '" + expect[i].first + "', found '" + names[i].get<std::string>() + "'");
    const Eigen::MatrixXd value = matrix_from_tensor(read_tensor(in));
    if (i < 4) {
      require(value.rows() == 1, "checkpoint: normalizer '" + expect[i].first + "' must be a row");
      *norms[i] = value.row(0);
      continue;
    }
    Eigen::MatrixXd& dst = *expect[i].second;
    require(value.rows() == dst.rows() && value.cols() == dst.cols(),
            "checkpoint: tensor '" + expect[i].first + "' has shape " + std::to_string(value.rows()) + "x" +
                std::to_string(value.cols()) + ", expected " + std::to_string(dst.rows()) + "x" +
                std::to_string(dst.cols()));
    require(value.allFinite(), "checkpoint: tensor '" + expect[i].first + "' is not finite");
    dst = value;
  }
  require(in.peek() == std::char_traits<char>::eof(), "checkpoint: trailing bytes after the last tensor");
  m.motion_norm.validate(m.params.config.feature_dim);
  m.audio_norm.validate(m.params.config.audio_dim);
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) { write_file_bytes(path, encode_model(model)); }

Model load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

}  // namespace speakgen::engine
