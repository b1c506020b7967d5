#include "engine/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/tensor_io.hpp"
#include "conditioning/audio.hpp"
#include "conditioning/text.hpp"
#include "diffusion/sampler.hpp"
#include "metrics/metrics.hpp"
#include "motion/bvh.hpp"
#include "motion/kinematics.hpp"

namespace speakgen::engine {
namespace {

using nlohmann::json;

constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kTrainTag = 2;
constexpr int kLossTail = 100;

void write_json(const fs::path& path, const json& j) { write_file_bytes(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file_bytes(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

motion::BvhDocument load_bvh(const fs::path& path, const EngineConfig& config) {
  motion::BvhDocument doc;
  try {
    doc = motion::parse_bvh(read_file_bytes(path), config.axis_map);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
  if (std::abs(doc.clip.fps - config.fps) > 1e-3 * config.fps) doc.clip = motion::resample(doc.clip, config.fps);
  doc.clip.fps = config.fps;
  return doc;
}

std::vector<std::string> joint_names(const motion::Skeleton& s) {
  std::vector<std::string> out;
  for (const auto& j : s.joints()) out.push_back(j.name);
  return out;
}

const conditioning::HashTextEncoder& text_encoder() {
  static const conditioning::HashTextEncoder encoder;
  return encoder;
}

dataset::NormStats identity_norm(int dim) {
  return {Eigen::RowVectorXd::Zero(dim), Eigen::RowVectorXd::Ones(dim)};
}

json file_record(const fs::path& path) {
  return {{"file", path.filename().string()}, {"sha256", sha256_hex(read_file_bytes(path))}};
}

}  // namespace

void synthesize_corpus(const fs::path& out_dir, const dataset::SyntheticConfig& corpus, std::uint64_t seed) {
  Rng rng(seed);
  const auto clips = dataset::make_synthetic_clips(corpus, rng);
  const motion::Skeleton skel = dataset::synthetic_skeleton();
  const json params = {{"frames", corpus.frames},        {"fps", corpus.fps},
                       {"per_family", corpus.per_family}, {"audio_clips", corpus.audio_clips},
                       {"wave_hz", corpus.wave_hz},       {"walk_hz", corpus.walk_hz},
                       {"speech_hz", corpus.speech_hz},  {"phase_spread", corpus.phase_spread}};
  ensure_dir(out_dir);
  json listing = json::array();
  for (const auto& c : clips) {
    write_file_bytes(out_dir / (c.name + ".bvh"), motion::write_bvh(skel, c.clip));
    if (!c.text.empty()) write_file_bytes(out_dir / (c.name + ".txt"), c.text + "\n");
    if (!c.audio.samples.empty()) write_file_bytes(out_dir / (c.name + ".wav"), conditioning::encode_wav(c.audio));
    listing.push_back({{"name", c.name}, {"family", c.family}});
  }
  const auto feet = dataset::synthetic_feet().names;
  write_json(out_dir / "synth.json", {{"seed", seed},
                                      {"parameters", params},
                                      {"parameters_digest", sha256_hex(params.dump())},
                                      {"feet", feet},
                                      {"clips", listing}});
}

PreprocessSummary preprocess(const EngineConfig& config, const fs::path& bvh_dir, const fs::path& out_dir,
                             std::uint64_t seed) {
  config.validate();
  const auto files = list_files(bvh_dir, ".bvh");
  require(!files.empty(), "no .bvh files in " + bvh_dir.string());
  const motion::FeatureOptions options = config.feature_options();

  std::vector<dataset::DatasetEntry> entries;
  std::optional<motion::Skeleton> canonical;
  std::vector<std::string> names;
  PreprocessSummary summary;
  for (const auto& path : files) {
    const motion::BvhDocument doc = load_bvh(path, config);
    if (!canonical) {
      canonical = motion::canonicalize(doc.skeleton, doc.clip, config.target_height).skeleton;
      names = joint_names(doc.skeleton);
    }
    require(joint_names(doc.skeleton) == names, path.string() + ": joint hierarchy differs from " +
                                                    files.front().filename().string());
    const fs::path stem = path.parent_path() / path.stem();
    std::string text;
    if (fs::exists(fs::path(stem).concat(".txt"))) text = trim(read_file_bytes(fs::path(stem).concat(".txt")));
    std::optional<conditioning::PcmAudio> audio;
    if (fs::exists(fs::path(stem).concat(".wav"))) audio = conditioning::read_wav(fs::path(stem).concat(".wav"));

    const int frames = doc.clip.frames();
    if (!audio && (frames < dataset::kMinTextFrames || frames > dataset::kMaxTextFrames)) {
      warn(path.filename().string() + ": " + std::to_string(frames) + " frames is outside [" +
           std::to_string(dataset::kMinTextFrames) + ", " + std::to_string(dataset::kMaxTextFrames) +
           "] for text-conditioned data, skipped");
      ++summary.skipped;
      continue;
    }
    try {
      entries.push_back(dataset::make_entry(path.stem().string(), doc.skeleton, doc.clip, text,
                                            audio ? &*audio : nullptr, options, text_encoder(), config.target_height));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  require(!entries.empty(), "every input clip was filtered out");

  Rng rng(seed);
  const auto splits = dataset::assign_splits(static_cast<int>(entries.size()), rng);
  json list = json::array();
  ensure_dir(out_dir / "features");
  ensure_dir(out_dir / "audio");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string feature_file = "features/" + e.name + ".ftkt";
    write_matrix_file(out_dir / feature_file, e.features);
    json item = {{"name", e.name},
                 {"features", feature_file},
                 {"frames", e.features.rows()},
                 {"original_frames", e.original_length},
                 {"text", e.text},
                 {"source", e.source},
                 {"split", dataset::split_name(splits[i])},
                 {"audio", nullptr}};
    if (e.bundle.has_audio) {
      const std::string audio_file = "audio/" + e.name + ".ftkt";
      write_matrix_file(out_dir / audio_file, e.bundle.audio);
      item["audio"] = audio_file;
    }
    list.push_back(std::move(item));
  }
  write_json(out_dir / "manifest.json", {{"format", "speakgen-dataset"},
                                         {"config", to_json(config)},
                                         {"config_digest", config_digest(config)},
                                         {"seed", seed},
                                         {"feature_dim", motion::feature_dim(canonical->joint_count())},
                                         {"skeleton", skeleton_to_json(*canonical)},
                                         {"entries", list}});
  summary.written = static_cast<int>(entries.size());
  return summary;
}

TrainOutcome train_model(const EngineConfig& config, const fs::path& data_dir, std::uint64_t seed,
                         const TrainProgress& progress) {
  config.validate();
  const fs::path manifest_path = data_dir / "manifest.json";
  const json manifest = read_json(manifest_path);
  TrainOutcome out;
  Model& model = out.model;
  model.config = config;
  model.seed = seed;
  int feature_dim = 0;
  try {
    model.skeleton = skeleton_from_json(manifest.at("skeleton"));
    feature_dim = manifest.at("feature_dim").get<int>();
    const double data_fps = manifest.at("config").at("fps").get<double>();
    require(data_fps == config.fps, "dataset was preprocessed at " + std::to_string(data_fps) +
                                        " fps but the config asks for " + std::to_string(config.fps));
  } catch (const json::exception& e) {
    throw ValidationError("dataset manifest: " + std::string(e.what()));
  }
  require(feature_dim == motion::feature_dim(model.skeleton.joint_count()),
          "dataset feature width does not match its skeleton");

  const int audio_dim = config.audio_layout.total();
  std::vector<Eigen::MatrixXd> features, audio;
  std::vector<std::string> texts;
  try {
    for (const auto& item : manifest.at("entries")) {
      if (item.at("split").get<std::string>() != "train") continue;
      Eigen::MatrixXd f = read_matrix_file(data_dir / item.at("features").get<std::string>());
      require(f.cols() == feature_dim, "entry " + item.at("name").get<std::string>() + " has the wrong feature width");
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(f.rows(), audio_dim);
      if (!item.at("audio").is_null()) {
        a = read_matrix_file(data_dir / item.at("audio").get<std::string>());
        require(a.rows() == f.rows() && a.cols() == audio_dim,
                "entry " + item.at("name").get<std::string>() + " has misaligned audio");
      }
      features.push_back(std::move(f));
      audio.push_back(std::move(a));
      texts.push_back(item.at("text").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError("dataset manifest: " + std::string(e.what()));
  }
  require(!features.empty(), "dataset has no training entries");

  model.motion_norm = dataset::NormStats::fit(features);
  std::vector<Eigen::MatrixXd> present_audio;
  for (const auto& a : audio)
    if (!a.isZero(0.0)) present_audio.push_back(a);
  model.audio_norm = present_audio.empty() ? identity_norm(audio_dim) : dataset::NormStats::fit(present_audio);

  std::vector<Eigen::MatrixXd> normalized;
  std::vector<conditioning::ConditionBundle> bundles;
  std::vector<int> text_set, audio_set;
  for (std::size_t i = 0; i < features.size(); ++i) {
    normalized.push_back(model.motion_norm.apply(features[i]));
    conditioning::ConditionBundle b =
        conditioning::ConditionBundle::empty(static_cast<int>(features[i].rows()), conditioning::kTextEmbeddingDim, audio_dim);
    b.text = conditioning::embed_text(texts[i], text_encoder());
    b.has_text = !b.text.isZero(0.0);
    if (!audio[i].isZero(0.0)) {
      b.audio = model.audio_norm.apply(audio[i]);
      b.has_audio = true;
    }
    (b.has_audio ? audio_set : text_set).push_back(static_cast<int>(i));
    bundles.push_back(std::move(b));
  }
  const std::vector<int> sizes{static_cast<int>(text_set.size()), static_cast<int>(audio_set.size())};
  std::vector<double> weights = config.dataset_weights;
  if (weights.empty()) weights = dataset::balanced_weights(sizes);
  require(weights.size() == 2, "train.dataset_weights needs two entries (text set, audio set)");
  const dataset::WeightedSampler sampler(sizes, weights);

  const int frames = config.frames;
  const denoiser::DrawFn draw = [&](Rng& rng) {
    const dataset::SampledIndex s = sampler.next(rng);
    const int i = (s.dataset == 0 ? text_set : audio_set)[static_cast<std::size_t>(s.index)];
    const auto idx = static_cast<std::size_t>(i);
    const dataset::Window w = dataset::pad_or_crop(normalized[idx], frames, rng);
    denoiser::TrainingDraw d;
    d.x0 = w.data;
    d.valid_frames = w.valid_frames;
    d.condition = bundles[idx];
    d.condition.audio = dataset::follow_window(bundles[idx].audio, w, frames);
    return d;
  };

  Rng init(Rng::mix(seed, kInitTag));
  const denoiser::DenoiserParams initial =
      denoiser::DenoiserParams::initialize(config.denoiser_config(feature_dim), init);
  Rng rng(Rng::mix(seed, kTrainTag));
  const auto schedule = diffusion::cosine_schedule(config.diffusion_steps);
  denoiser::TrainResult result = denoiser::train(initial, draw, schedule, config.train_config(), rng, progress);
  model.params = std::move(result.params);
  out.loss_curve = std::move(result.loss_curve);

  const int tail = std::min<int>(kLossTail, static_cast<int>(out.loss_curve.size()));
  double tail_mean = 0.0;
  for (int i = static_cast<int>(out.loss_curve.size()) - tail; i < static_cast<int>(out.loss_curve.size()); ++i)
    tail_mean += out.loss_curve[static_cast<std::size_t>(i)];
  tail_mean /= tail;
  model.training = {{"steps", config.train_steps},
                    {"entries", features.size()},
                    {"text_entries", text_set.size()},
                    {"audio_entries", audio_set.size()},
                    {"initial_loss", out.loss_curve.front()},
                    {"final_loss", tail_mean},
                    {"final_loss_window", tail},
                    {"dataset_manifest_sha256", sha256_hex(read_file_bytes(manifest_path))}};
  return out;
}

void write_training_outputs(const fs::path& out, const TrainOutcome& outcome) {
  const std::string digest = config_digest(outcome.model.config);
  std::ostringstream csv;
  csv.precision(17);
  csv << "# config_digest=" << digest << " seed=" << outcome.model.seed << "\n";
  csv << "step,loss\n";
  for (std::size_t i = 0; i < outcome.loss_curve.size(); ++i) csv << i << "," << outcome.loss_curve[i] << "\n";
  save_model(out, outcome.model);
  write_file_bytes(fs::path(out).concat(".loss.csv"), csv.str());
}

LoadedModel open_model(const fs::path& path) {
  const std::string bytes = read_file_bytes(path);
  return {decode_model(bytes), sha256_hex(bytes)};
}

conditioning::ConditionBundle make_bundle(const Model& model, const std::string& text,
                                          const conditioning::PcmAudio* audio, int frames) {
  const auto& cfg = model.params.config;
  require(text_encoder().dim() == cfg.text_dim, "text encoder width does not match the model");
  conditioning::ConditionBundle b = conditioning::ConditionBundle::empty(frames, cfg.text_dim, cfg.audio_dim);
  b.text = conditioning::embed_text(text, text_encoder());
  b.has_text = !b.text.isZero(0.0);
  if (audio != nullptr) {
    const Eigen::MatrixXd raw = conditioning::extract_audio_features(*audio, model.config.audio_layout);
    b.audio = model.audio_norm.apply(conditioning::align_audio_to_frames(raw, frames));
    b.has_audio = true;
  }
  return b;
}

Eigen::MatrixXd sample_features(const Model& model, const SampleRequest& request) {
  const int frames = request.frames == 0 ? model.config.frames : request.frames;
  require(frames >= 2 && frames <= model.params.config.max_len,
          "frames must lie in [2, " + std::to_string(model.params.config.max_len) + "]");
  require(std::isfinite(request.gamma), "gamma must be finite");
  std::optional<conditioning::PcmAudio> audio;
  if (request.audio) audio = conditioning::read_wav(*request.audio);
  const auto bundle = make_bundle(model, request.text, audio ? &*audio : nullptr, frames);
  const denoiser::Network net(model.params);
  const auto schedule = diffusion::cosine_schedule(model.config.diffusion_steps);
  Rng rng(request.seed);
  return diffusion::sample_loop(net, bundle, request.gamma, frames, schedule, rng);
}

std::string features_to_bvh(const Model& model, const Eigen::MatrixXd& normalized) {
  motion::FeatureSequence seq;
  seq.data = model.motion_norm.invert(normalized);
  seq.layout = motion::FeatureLayout::for_joints(model.skeleton.joint_count());
  const motion::MotionClip clip = motion::decode_features(seq, model.skeleton, model.config.fps);
  return motion::write_bvh(model.skeleton, clip);
}

void run_sample(const LoadedModel& model, const SampleRequest& request, const fs::path& out_bvh) {
  const Eigen::MatrixXd x = sample_features(model.model, request);
  const std::string bvh = features_to_bvh(model.model, x);
  json meta = {{"command", "sample"},
               {"config", to_json(model.model.config)},
               {"config_digest", config_digest(model.model.config)},
               {"model_sha256", model.digest},
               {"seed", request.seed},
               {"text", request.text},
               {"gamma", request.gamma},
               {"frames", x.rows()},
               {"audio", nullptr}};
  if (request.audio) meta["audio"] = file_record(*request.audio);
  write_file_bytes(out_bvh, bvh);
  write_json(fs::path(out_bvh).concat(".json"), meta);
}

std::vector<ScriptSegment> load_script(const fs::path& path) {
  const json j = read_json(path);
  require(j.is_array() && !j.empty(), path.string() + ": script must be a non-empty JSON array");
  std::vector<ScriptSegment> out;
  try {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto& e = j[i];
      require(e.is_object(), "script segment " + std::to_string(i) + " must be an object");
      for (auto it = e.begin(); it != e.end(); ++it)
        require(it.key() == "text" || it.key() == "audio" || it.key() == "frames" || it.key() == "gamma",
                "script segment " + std::to_string(i) + ": unknown key '" + it.key() + "'");
      ScriptSegment s;
      s.text = e.value("text", std::string());
      if (e.contains("audio") && !e.at("audio").is_null()) {
        fs::path a = e.at("audio").get<std::string>();
        s.audio = a.is_absolute() ? a : path.parent_path() / a;
      }
      s.frames = e.at("frames").get<int>();
      s.gamma = e.value("gamma", 1.0);
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return out;
}

double max_frame_jump(const Eigen::MatrixXd& features, int begin, int end) {
  begin = std::max(begin, 0);
  end = std::min<int>(end, static_cast<int>(features.rows()));
  double worst = 0.0;
  for (int f = begin + 1; f < end; ++f) worst = std::max(worst, (features.row(f) - features.row(f - 1)).norm());
  return worst;
}

ComposeOutcome compose(const LoadedModel& loaded, const std::vector<ScriptSegment>& script, std::uint64_t seed) {
  const Model& model = loaded.model;
  const auto& dt = model.config.doubletake;
  std::vector<doubletake::Segment> segments;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& s = script[i];
    require(s.frames >= 2 && s.frames <= model.params.config.max_len,
            "script segment " + std::to_string(i) + ": frames must lie in [2, " +
                std::to_string(model.params.config.max_len) + "]");
    require(std::isfinite(s.gamma), "script segment " + std::to_string(i) + ": gamma must be finite");
    std::optional<conditioning::PcmAudio> audio;
    if (s.audio) audio = conditioning::read_wav(*s.audio);
    segments.push_back({make_bundle(model, s.text, audio ? &*audio : nullptr, s.frames), s.gamma, s.frames});
  }
  const denoiser::Network net(model.params);
  const auto schedule = diffusion::cosine_schedule(model.config.diffusion_steps);

  ComposeOutcome out;
  out.composition = doubletake::compose_long(net, segments, dt, schedule, seed);
  const auto& c = out.composition;
  out.bvh = features_to_bvh(model, c.motion);

  json segs = json::array();
  for (std::size_t i = 0; i < script.size(); ++i) {
    const int begin = c.segment_begin[i];
    json s = {{"index", i},
              {"text", script[i].text},
              {"frames", script[i].frames},
              {"gamma", script[i].gamma},
              {"output_begin", begin},
              {"output_end", begin + script[i].frames},
              {"audio", nullptr}};
    if (script[i].audio) s["audio"] = file_record(*script[i].audio);
    segs.push_back(std::move(s));
  }
  json transitions = json::array();
  double before = 0.0, after = 0.0;
  for (const auto& t : c.transitions) {
    // steps entering and leaving the handshake
    const int entry = t.handshake_begin;
    const int exit = t.handshake_begin + dt.handshake;
    const auto junction = [&](const Eigen::MatrixXd& x) {
      return std::max(max_frame_jump(x, entry - 1, entry + 1), max_frame_jump(x, exit - 1, exit + 1));
    };
    const double jb = junction(c.first_take);
    const double ja = junction(c.motion);
    before = std::max(before, jb);
    after = std::max(after, ja);
    transitions.push_back({{"handshake_begin", t.handshake_begin},
                           {"handshake_end", t.handshake_begin + dt.handshake},
                           {"window_begin", t.window_begin},
                           {"window_end", t.window_end},
                           {"jump_first_take", jb},
                           {"jump_refined", ja}});
  }
  json owners = json::array();
  for (const auto& s : c.sources) owners.push_back(s.segment);
  out.metadata = {{"command", "compose"},
                  {"config", to_json(model.config)},
                  {"config_digest", config_digest(model.config)},
                  {"model_sha256", loaded.digest},
                  {"seed", seed},
                  {"fps", model.config.fps},
                  {"frame_count", c.motion.rows()},
                  {"handshake", dt.handshake},
                  {"blend", dt.blend},
                  {"refine_steps", dt.refine_steps},
                  {"segments", segs},
                  {"transitions", transitions},
                  {"frame_owner", owners},
                  {"boundary_jump", {{"first_take", before}, {"refined", after}}}};
  return out;
}

void run_compose(const LoadedModel& model, const fs::path& script_path, std::uint64_t seed, const fs::path& out_bvh) {
  const ComposeOutcome c = compose(model, load_script(script_path), seed);
  write_file_bytes(out_bvh, c.bvh);
  write_json(fs::path(out_bvh).concat(".json"), c.metadata);
}

nlohmann::json evaluate(const EngineConfig& config, const fs::path& generated_dir, const fs::path& reference_dir) {
  config.validate();
  struct Set {
    std::vector<Eigen::MatrixXd> positions, features;
    json inputs = json::array();
  };
  const motion::FeatureOptions options = config.feature_options();
  auto load = [&](const fs::path& dir) {
    Set s;
    const auto files = list_files(dir, ".bvh");
    require(!files.empty(), "no .bvh files in " + dir.string());
    for (const auto& f : files) {
      const motion::BvhDocument doc = load_bvh(f, config);
      const motion::CanonicalMotion canon = motion::canonicalize(doc.skeleton, doc.clip, config.target_height);
      s.positions.push_back(motion::forward_kinematics(canon.skeleton, canon.clip));
      try {
        s.features.push_back(motion::encode_features(canon.skeleton, canon.clip, options).data);
      } catch (const ValidationError& e) {
        throw ValidationError(f.string() + ": " + e.what());
      }
      s.inputs.push_back(file_record(f));
    }
    return s;
  };
  const Set gen = load(generated_dir);
  const Set ref = load(reference_dir);
  require(gen.features.front().cols() == ref.features.front().cols(),
          "generated and reference motion use different skeletons");

  auto stats = [&](const Set& s, int order) {
    const auto k = metrics::kinematic_stats_from_positions(s.positions, config.fps, order);
    return json{{"mean", k.mean}, {"std", k.std}, {"sequences", k.sequences}};
  };
  auto pool = [](const std::vector<Eigen::MatrixXd>& v) {
    Eigen::Index rows = 0;
    for (const auto& m : v) rows += m.rows();
    Eigen::MatrixXd all(rows, v.front().cols());
    Eigen::Index r = 0;
    for (const auto& m : v) {
      all.middleRows(r, m.rows()) = m;
      r += m.rows();
    }
    return all;
  };
  const double fid =
      metrics::frechet_distance(metrics::fit_gaussian(pool(gen.features)), metrics::fit_gaussian(pool(ref.features)));

  const dataset::NormStats norm = dataset::NormStats::fit(ref.features);
  const std::size_t pairs = std::min(gen.features.size(), ref.features.size());
  double ssim_total = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Eigen::Index n = std::min(gen.features[i].rows(), ref.features[i].rows());
    ssim_total += metrics::ssim(norm.apply(gen.features[i].topRows(n)), norm.apply(ref.features[i].topRows(n)));
  }

  return {{"command", "eval"},
          {"config", to_json(config)},
          {"config_digest", config_digest(config)},
          {"seed", nullptr},
          {"metrics",
           {{"jerk", {{"generated", stats(gen, 3)}, {"reference", stats(ref, 3)}}},
            {"acceleration", {{"generated", stats(gen, 2)}, {"reference", stats(ref, 2)}}},
            {"fid", fid},
            {"ssim", {{"mean", ssim_total / static_cast<double>(pairs)}, {"pairs", pairs}}}}},
          {"conventions",
           {{"kinematics", "forward binomial difference of canonicalized global joint positions, scaled by fps^order; "
                           "mean absolute value per sequence, then mean and population std across sequences"},
            {"fid", "Frechet distance between Gaussian fits of pooled kinematic feature frames"},
            {"ssim", "11x11 Gaussian window (sigma 1.5), K1 0.01, K2 0.03, range from both inputs; features "
                     "standardized with reference statistics; files paired in sorted order, cropped to the shorter"},
            {"absolute_values", "desk-scale feature space; only relative comparisons are meaningful"}}},
          {"inputs", {{"generated", gen.inputs}, {"reference", ref.inputs}}}};
}

void run_eval(const EngineConfig& config, const fs::path& generated_dir, const fs::path& reference_dir,
              const fs::path& report) {
  write_json(report, evaluate(config, generated_dir, reference_dir));
}

}  // namespace speakgen::engine
