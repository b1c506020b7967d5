// Acceptance run. Library-level suites run in process; training, composition
// and reproducibility go through the command-line tool.
//
//   speakgen_acceptance <speakgen binary> <desk config> <work dir> [criterion...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/tensor_io.hpp"
#include "dataset/dataset.hpp"
#include "denoiser/network.hpp"
#include "denoiser/trainer.hpp"
#include "diffusion/sampler.hpp"
#include "diffusion/schedule.hpp"
#include "doubletake/doubletake.hpp"
#include "engine/checkpoint.hpp"
#include "metrics/metrics.hpp"
#include "motion/bvh.hpp"
#include "motion/features.hpp"
#include "motion/kinematics.hpp"
#include "motion/rotation.hpp"
#include "support.hpp"

using namespace speakgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Paths {
  fs::path cli, config, work;
};

int run(const std::string& command) {
  const int raw = std::system((command + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative path -> bytes for every regular file under a directory.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

// ---------------------------------------------------------------------------

Outcome rotation_and_codec() {
  using motion::RotationForm;
  Outcome o;
  const RotationForm forms[] = {RotationForm::kMatrix, RotationForm::kAxisAngle, RotationForm::kQuaternion,
                                RotationForm::kSixD};
  Rng rng(1000);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Quaterniond qr = testing::random_rotation(rng);
    Eigen::VectorXd qv(4);
    qv << qr.w(), qr.x(), qr.y(), qr.z();
    const Eigen::Matrix3d truth = qr.toRotationMatrix();
    for (RotationForm from : forms) {
      const Eigen::VectorXd start = motion::convert_rotation(qv, RotationForm::kQuaternion, from);
      for (RotationForm to : forms) {
        const Eigen::VectorXd back =
            motion::convert_rotation(motion::convert_rotation(start, from, to), to, from);
        const Eigen::VectorXd m = motion::convert_rotation(back, from, RotationForm::kMatrix);
        worst = std::max(worst, (Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m.data()) - truth)
                                    .cwiseAbs()
                                    .maxCoeff());
      }
    }
  }
  o.check(worst < 1e-6, "rotation round trip max error " + fmt(worst));

  const motion::Skeleton skel = testing::biped();
  const auto opts = testing::biped_feature_options();
  double reencode = 0.0, drift = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng r(seed);
    const auto c = motion::canonicalize(skel, testing::wandering_clip(skel, 180, r));
    const auto fs = motion::encode_features(c.skeleton, c.clip, opts);
    const motion::MotionClip back = motion::decode_features(fs, c.skeleton);
    const auto again = motion::encode_features(c.skeleton, back, opts);
    const int contact = fs.layout.foot_contacts.begin;
    reencode = std::max(reencode, (fs.data.leftCols(contact) - again.data.leftCols(contact)).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd a = motion::forward_kinematics(c.skeleton, c.clip);
    const Eigen::MatrixXd b = motion::forward_kinematics(c.skeleton, back);
    for (int f = 0; f < 180; ++f)
      for (int j = 0; j < c.skeleton.joint_count(); ++j)
        drift = std::max(drift, (motion::joint_position(a, f, j) - motion::joint_position(b, f, j)).norm());
  }
  o.check(reencode < 1e-3, "re-encode error " + fmt(reencode));
  o.check(drift < 1e-2, "decoded joint drift over 180 frames " + fmt(drift) + " m");
  o.check(motion::feature_dim(55) == 659, "D(55) = " + std::to_string(motion::feature_dim(55)));
  return o;
}

Outcome diffusion_math() {
  Outcome o;
  const auto s = diffusion::cosine_schedule(1000);
  bool monotone = true;
  for (int t = 1; t <= 1000; ++t) monotone = monotone && s.alpha_bar(t) < s.alpha_bar(t - 1);
  o.check(monotone && s.alpha_bar(0) == 1.0 && s.alpha_bar(1000) <= 1e-3,
          "schedule monotone, alpha_bar(T) = " + fmt(s.alpha_bar(1000)));

  // Each draw noises an 8-wide row; moments pool over draws and columns.
  const double x0 = 1.3;
  const int draws = 10000, width = 8;
  double worst_mean = 0.0, worst_var = 0.0;
  Rng rng(2);
  for (int t : {10, 250, 600}) {
    double mc = 0, vc = 0, mi = 0, vi = 0;
    for (int i = 0; i < draws; ++i) {
      const Eigen::MatrixXd c =
          diffusion::q_sample(Eigen::MatrixXd::Constant(1, width, x0), t, rng.normal_matrix(1, width), s);
      Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, width, x0);
      for (int k = 1; k <= t; ++k) x = std::sqrt(s.alpha(k)) * x + std::sqrt(1 - s.alpha(k)) * rng.normal_matrix(1, width);
      mc += c.sum(), vc += c.squaredNorm(), mi += x.sum(), vi += x.squaredNorm();
    }
    const double n = static_cast<double>(draws) * width;
    mc /= n, mi /= n;
    vc = vc / n - mc * mc;
    vi = vi / n - mi * mi;
    // Relative where the moment is large, absolute floor where it is near zero.
    worst_mean = std::max(worst_mean, std::abs(mc - mi) / std::max(std::abs(mi), 0.5));
    worst_var = std::max(worst_var, std::abs(vc - vi) / std::max(vi, 0.5));
  }
  o.check(worst_mean < 0.02 && worst_var < 0.02,
          "closed form vs iterated: mean " + fmt(worst_mean) + ", variance " + fmt(worst_var));

  const auto s100 = diffusion::cosine_schedule(100);
  Rng seed(21);
  const Eigen::MatrixXd target = seed.normal_matrix(6, 4);
  const auto b = conditioning::ConditionBundle::empty(6, 8, 3);
  const diffusion::FunctionDenoiser oracle(4, [&](const Eigen::MatrixXd&, int, const conditioning::ConditionBundle&) {
    return target;
  });
  double recover = 0.0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    Rng r(k);
    recover = std::max(recover, (diffusion::sample_loop(oracle, b, 1.0, 6, s100, r) - target).cwiseAbs().maxCoeff());
  }
  o.check(recover < 1e-4, "oracle sample loop error " + fmt(recover));
  return o;
}

Outcome guidance() {
  Outcome o;
  const diffusion::FunctionDenoiser d(4, [](const Eigen::MatrixXd& x, int t, const conditioning::ConditionBundle& c) {
    Eigen::MatrixXd out = 0.5 * x.array().sin().matrix();
    out.array() += 0.001 * t + (c.has_text ? c.text.sum() + 1.0 : 0.0);
    out.array() += c.has_audio ? c.audio.mean() : 0.0;
    return out;
  });
  auto b = conditioning::ConditionBundle::empty(5, 8, 3);
  b.text = Eigen::VectorXd::LinSpaced(8, -1, 1);
  b.audio.setConstant(0.3);
  b.has_text = b.has_audio = true;
  Rng rng(5);
  const Eigen::MatrixXd x = rng.normal_matrix(5, 4);
  const Eigen::MatrixXd cond = d.predict(x, 7, b);
  const Eigen::MatrixXd uncond = d.predict(x, 7, b.without_text());
  o.check(diffusion::cfg_denoise(d, x, 7, b, 0.0) == uncond, "gamma 0 equals the audio-only prediction exactly");
  o.check(diffusion::cfg_denoise(d, x, 7, b, 1.0) == cond, "gamma 1 equals the conditional prediction exactly");
  double affine = 0.0;
  for (double g : {-1.0, 0.25, 0.5, 2.0, 3.5, 7.5})
    affine = std::max(affine,
                      (diffusion::cfg_denoise(d, x, 7, b, g) - (uncond + g * (cond - uncond))).cwiseAbs().maxCoeff());
  o.check(affine < 1e-6, "affinity in gamma, max deviation " + fmt(affine));
  return o;
}

Outcome gradient_check() {
  Outcome o;
  denoiser::DenoiserConfig c;
  c.feature_dim = 5;
  c.audio_dim = 3;
  c.text_dim = 4;
  c.hidden_dim = 16;
  c.layers = 2;
  c.heads = 2;
  c.max_len = 16;
  c.diffusion_steps = 10;
  Rng rng(6);
  denoiser::DenoiserParams p = denoiser::DenoiserParams::initialize(c, rng);
  for (auto& [name, t] : p.tensors()) *t += 0.2 * rng.normal_matrix(t->rows(), t->cols());
  const auto s = diffusion::cosine_schedule(c.diffusion_steps);
  std::vector<denoiser::TrainingSample> batch;
  for (int frames : {4, 3}) {
    denoiser::TrainingSample x;
    x.x0 = rng.normal_matrix(frames, c.feature_dim);
    x.t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c.diffusion_steps)));
    x.noise = rng.normal_matrix(frames, c.feature_dim);
    x.condition = conditioning::ConditionBundle::empty(frames, c.text_dim, c.audio_dim);
    x.condition.text = rng.normal_matrix(c.text_dim, 1);
    x.condition.audio = rng.normal_matrix(frames, c.audio_dim);
    x.condition.has_text = x.condition.has_audio = true;
    batch.push_back(std::move(x));
  }
  batch[1].valid_frames = 2;
  const diffusion::LossConfig loss;
  auto total = [&](const denoiser::DenoiserParams& params) {
    double sum = 0;
    for (const auto& x : batch) sum += denoiser::sample_loss(params, x, s, loss);
    return sum / static_cast<double>(batch.size());
  };
  const auto g = denoiser::compute_gradients(p, batch, s, loss);
  auto probe = p.tensors();
  const auto grads = g.grads.tensors();
  double worst = 0.0;
  long checked = 0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    Eigen::MatrixXd& w = *probe[k].second;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double keep = w.data()[i];
      const double h = 1e-5;
      w.data()[i] = keep + h;
      const double up = total(p);
      w.data()[i] = keep - h;
      const double down = total(p);
      w.data()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[k].second->data()[i];
      // Entries whose gradient is below the finite-difference noise floor
      // compare absolutely.
      worst = std::max(worst, std::abs(numeric - analytic) / std::max(1e-5, std::abs(numeric) + std::abs(analytic)));
      ++checked;
    }
  }
  o.check(worst < 1e-4, "max relative error " + fmt(worst) + " over all " + std::to_string(checked) + " parameters");
  return o;
}

Outcome metrics_suite() {
  Outcome o;
  auto uni = [](double mean, double var) {
    metrics::GaussianFit f;
    f.mean = Eigen::VectorXd::Constant(1, mean);
    f.covariance = Eigen::MatrixXd::Constant(1, 1, var);
    return f;
  };
  const double shift = metrics::frechet_distance(uni(0, 1), uni(1, 1));
  const double scale = metrics::frechet_distance(uni(0, 1), uni(0, 4));
  o.check(std::abs(shift - 1.0) < 1e-9 && std::abs(scale - 1.0) < 1e-9,
          "1-D closed forms " + fmt(shift) + ", " + fmt(scale));
  Rng rng(7);
  const auto fit = metrics::fit_gaussian(rng.normal_matrix(300, 12));
  const double self = metrics::frechet_distance(fit, fit);
  o.check(self < 1e-6, "self-FID " + fmt(self));
  const Eigen::MatrixXd img = rng.normal_matrix(40, 30);
  const double ss = metrics::ssim(img, img);
  o.check(std::abs(ss - 1.0) < 1e-9, "self-SSIM " + fmt(ss));

  const double fps = 20;
  auto track = [&](auto f) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(40, 3);
    for (int i = 0; i < 40; ++i) p(i, 0) = f(i / fps);
    return p;
  };
  // mean_abs_derivative averages over the three axes; only x moves.
  const double cubic = 3 * metrics::mean_abs_derivative(track([](double t) { return t * t * t; }), fps, 3);
  const double quad = metrics::mean_abs_derivative(track([](double t) { return 2 * t * t - t; }), fps, 3);
  o.check(std::abs(cubic - 6.0) < 0.06, "cubic jerk " + fmt(cubic) + " m/s^3");
  o.check(std::abs(quad) < 1e-9, "quadratic jerk " + fmt(quad));
  return o;
}

// ---------------------------------------------------------------------------

struct ToyRun {
  bool ready = false;
  std::string error;
  fs::path corpus, data, model;
};

ToyRun& toy(const Paths& paths) {
  static ToyRun r;
  static bool tried = false;
  if (tried) return r;
  tried = true;
  const fs::path root = paths.work / "toy";
  fs::remove_all(root);
  fs::create_directories(root);
  r.corpus = root / "corpus";
  r.data = root / "data";
  r.model = root / "model.ckpt";
  const std::string cli = q(paths.cli);
  if (run(cli + " synth --out " + q(r.corpus) + " --seed 11") != 0) {
    r.error = "synth failed";
  } else if (run(cli + " preprocess --config " + q(paths.config) + " --bvh-dir " + q(r.corpus) + " --out " +
                 q(r.data) + " --seed 11") != 0) {
    r.error = "preprocess failed";
  } else if (run(cli + " train --quiet --config " + q(paths.config) + " --data " + q(r.data) + " --out " +
                 q(r.model) + " --seed 7") != 0) {
    r.error = "train failed";
  } else {
    r.ready = true;
  }
  return r;
}

std::vector<double> read_loss_curve(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("step", 0) == 0) continue;
    out.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  return out;
}

Outcome toy_training(const Paths& paths) {
  Outcome o;
  const ToyRun& t = toy(paths);
  if (!t.ready) {
    o.check(false, t.error);
    return o;
  }
  const auto curve = read_loss_curve(fs::path(t.model).concat(".loss.csv"));
  const json config = json::parse(slurp(paths.config));
  const std::size_t steps = config.at("train").at("steps").get<std::size_t>();
  o.check(curve.size() == steps && steps <= 2000, std::to_string(curve.size()) + " steps");
  if (curve.size() < 100) return o;
  double tail = 0;
  for (std::size_t i = curve.size() - 100; i < curve.size(); ++i) tail += curve[i];
  tail /= 100;
  o.check(tail < 0.25 * curve.front(), "loss " + fmt(curve.front()) + " -> " + fmt(tail) + " (mean of last 100), ratio " +
                                           fmt(tail / curve.front()));

  const dataset::SyntheticConfig corpus;
  const double bin = corpus.fps / corpus.frames;
  int hits = 0;
  std::string freqs;
  for (int seed = 0; seed < 10; ++seed) {
    const fs::path out = paths.work / "toy" / ("wave_" + std::to_string(seed) + ".bvh");
    if (run(q(paths.cli) + " sample --model " + q(t.model) + " --text 'a person waves' --frames " +
            std::to_string(corpus.frames) + " --seed " + std::to_string(seed) + " --out " + q(out)) != 0) {
      o.check(false, "sample " + std::to_string(seed) + " failed");
      return o;
    }
    const auto doc = motion::parse_bvh(slurp(out));
    const Eigen::MatrixXd pos = motion::forward_kinematics(doc.skeleton, doc.clip);
    const int hand = doc.skeleton.find(dataset::kSyntheticArmJoint);
    const double f = testing::dominant_frequency(pos.col(3 * hand + 1), doc.clip.fps);
    if (std::abs(f - corpus.wave_hz) <= bin + 1e-9) ++hits;
    freqs += (freqs.empty() ? "" : " ") + fmt(f);
  }
  o.check(hits >= 8, std::to_string(hits) + "/10 wave samples at " + fmt(corpus.wave_hz) + " Hz +- one bin (" +
                         fmt(bin) + " Hz); dominant: " + freqs);
  return o;
}

Outcome doubletake_suite(const Paths& paths) {
  Outcome o;
  const ToyRun& t = toy(paths);
  if (!t.ready) {
    o.check(false, t.error);
    return o;
  }
  const engine::Model model = engine::load_model(t.model);
  const denoiser::Network net(model.params);
  const auto schedule = diffusion::cosine_schedule(model.config.diffusion_steps);
  const auto& dt = model.config.doubletake;

  {
    Rng rng(3);
    const int frames = 40;
    const Eigen::MatrixXd first = rng.normal_matrix(frames, net.feature_dim());
    doubletake::SandwichConditions cond;
    cond.bundles = {conditioning::ConditionBundle::empty(frames, model.params.config.text_dim,
                                                         model.params.config.audio_dim)};
    cond.gammas = {1.0};
    cond.owner.assign(frames, 0);
    Rng r(4);
    const Eigen::MatrixXd out =
        doubletake::refine_sandwich(net, first, Eigen::VectorXd::Zero(frames), cond, dt, schedule, r);
    o.check(out == first, "zero mask leaves the sandwich bit-identical");
  }
  {
    Rng rng(5);
    const Eigen::MatrixXd a = rng.normal_matrix(dt.handshake, 6), b = rng.normal_matrix(dt.handshake, 6);
    const Eigen::MatrixXd tau = doubletake::blend_handshake(a, b);
    bool convex = tau.row(0) == a.row(0);
    for (int j = 0; j < dt.handshake; ++j) {
      const double alpha = static_cast<double>(j) / dt.handshake;
      convex = convex && (tau.row(j) - ((1 - alpha) * a.row(j) + alpha * b.row(j))).cwiseAbs().maxCoeff() < 1e-12;
      for (int c = 0; c < 6; ++c)
        convex = convex && tau(j, c) >= std::min(a(j, c), b(j, c)) - 1e-12 && tau(j, c) <= std::max(a(j, c), b(j, c)) + 1e-12;
    }
    o.check(convex, "handshake blend starts at the outgoing clip and stays convex");
    const auto m = doubletake::build_transition_masks(dt.context, dt.context, dt).product();
    o.check(std::abs(m(dt.context) - dt.hard_max) < 1e-12 && std::abs(m(dt.context - dt.blend) - dt.soft_min) < 1e-12 &&
                m(dt.context - dt.blend - 1) == 0.0,
            "mask product: hard_max on the handshake, soft_min at the blend edge, 0 beyond");
  }

  Rng scripts(2024);
  const char* texts[] = {"a person waves", "a person walks forward", "a person stands still"};
  int lengths_ok = 0, smoother = 0;
  double before_sum = 0, after_sum = 0;
  std::string worst;
  for (int s = 0; s < 20; ++s) {
    const int n = 2 + static_cast<int>(scripts.uniform_index(2));
    json script = json::array();
    int total = 0;
    for (int i = 0; i < n; ++i) {
      const int frames = 40 + static_cast<int>(scripts.uniform_index(21));
      json seg = {{"frames", frames}};
      if (scripts.bernoulli(0.25)) {
        seg["audio"] = (t.corpus / ("speech_" + std::to_string(scripts.uniform_index(24)) + ".wav")).string();
      } else {
        seg["text"] = texts[scripts.uniform_index(3)];
      }
      total += frames;
      script.push_back(seg);
    }
    const fs::path sp = paths.work / "toy" / ("script_" + std::to_string(s) + ".json");
    const fs::path out = paths.work / "toy" / ("compose_" + std::to_string(s) + ".bvh");
    std::ofstream(sp) << script.dump(2);
    if (run(q(paths.cli) + " compose --model " + q(t.model) + " --script " + q(sp) + " --seed " + std::to_string(s) +
            " --out " + q(out)) != 0) {
      o.check(false, "compose " + std::to_string(s) + " failed");
      return o;
    }
    const json meta = json::parse(slurp(fs::path(out).concat(".json")));
    const auto doc = motion::parse_bvh(slurp(out));
    const int expected = total - (n - 1) * dt.handshake;
    if (meta.at("frame_count").get<int>() == expected && doc.clip.frames() == expected) ++lengths_ok;
    const double before = meta.at("boundary_jump").at("first_take").get<double>();
    const double after = meta.at("boundary_jump").at("refined").get<double>();
    before_sum += before;
    after_sum += after;
    if (after <= before) {
      ++smoother;
    } else if (worst.empty()) {
      worst = "; script " + std::to_string(s) + ": " + fmt(before) + " -> " + fmt(after);
    }
  }
  o.check(lengths_ok == 20, std::to_string(lengths_ok) + "/20 composed lengths equal sum - (n-1)h");
  o.check(smoother == 20, std::to_string(smoother) + "/20 scripts with refined boundary jump <= first take (mean " +
                              fmt(before_sum / 20) + " -> " + fmt(after_sum / 20) + ")" + worst);
  return o;
}

Outcome reproducibility(const Paths& paths) {
  Outcome o;
  const std::string cli = q(paths.cli);
  const fs::path root = paths.work / "repro";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> outputs;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path d = root / std::to_string(pass);
    fs::create_directories(d / "gen");
    fs::create_directories(d / "out");
    const std::string model = q(d / "out" / "model.ckpt");
    std::ofstream(d / "out" / "script.json") << R"([{"text": "a person waves", "frames": 50},
      {"text": "a person walks forward", "frames": 45}, {"text": "a person stands still", "frames": 40}])";
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"synth", cli + " synth --out " + q(d / "corpus") + " --seed 3 --per-family 4 --audio-clips 4"},
        {"preprocess", cli + " preprocess --config " + q(paths.config) + " --bvh-dir " + q(d / "corpus") + " --out " +
                           q(d / "data") + " --seed 3"},
        {"train", cli + " train --quiet --config " + q(paths.config) + " --set train.steps=20 --data " + q(d / "data") +
                      " --out " + model + " --seed 7"},
        {"sample", cli + " sample --model " + model + " --text 'a person waves' --audio " +
                       q(d / "corpus" / "speech_0.wav") + " --gamma 2 --seed 5 --out " + q(d / "gen" / "a.bvh")},
        {"compose", cli + " compose --model " + model + " --script " + q(d / "out" / "script.json") +
                        " --seed 9 --out " + q(d / "gen" / "b.bvh")},
        {"eval", cli + " eval --config " + q(paths.config) + " --generated " + q(d / "gen") + " --reference " +
                     q(d / "corpus") + " --report " + q(d / "out" / "report.json")},
    };
    for (const auto& [name, command] : steps)
      if (run(command) != 0) {
        o.check(false, name + " failed");
        return o;
      }
    outputs.push_back(tree(d));
  }
  std::set<std::string> differing;
  for (const auto& [name, bytes] : outputs[0]) {
    const auto it = outputs[1].find(name);
    if (it == outputs[1].end() || it->second != bytes) differing.insert(name);
  }
  std::string list;
  for (const auto& d : differing) list += " " + d;
  o.check(differing.empty() && outputs[0].size() == outputs[1].size(),
          std::to_string(outputs[0].size()) + " output files byte-identical across reruns" +
              (list.empty() ? "" : "; differ:" + list));

  const fs::path d = root / "0";
  const std::string model = q(d / "out" / "model.ckpt");
  const std::string audio = q(d / "corpus" / "speech_0.wav");
  run(cli + " sample --model " + model + " --text 'a person waves' --audio " + audio + " --gamma 0 --seed 5 --out " +
      q(d / "g0.bvh"));
  run(cli + " sample --model " + model + " --text 'a person waves' --audio " + audio + " --gamma 1 --seed 5 --out " +
      q(d / "g1.bvh"));
  run(cli + " sample --model " + model + " --audio " + audio + " --seed 5 --out " + q(d / "audio_only.bvh"));
  o.check(slurp(d / "g0.bvh") != slurp(d / "g1.bvh") && slurp(d / "g0.bvh") == slurp(d / "audio_only.bvh"),
          "gamma 0 and gamma 1 differ; gamma 0 equals the audio-only run byte for byte");
  std::ofstream(d / "single.json") << R"([{"text": "a person waves", "frames": 50, "gamma": 1.5}])";
  run(cli + " compose --model " + model + " --script " + q(d / "single.json") + " --seed 4 --out " +
      q(d / "single.bvh"));
  run(cli + " sample --model " + model + " --text 'a person waves' --frames 50 --gamma 1.5 --seed 4 --out " +
      q(d / "plain.bvh"));
  o.check(!slurp(d / "single.bvh").empty() && slurp(d / "single.bvh") == slurp(d / "plain.bvh"),
          "one-segment compose equals sample byte for byte");
  const int usage = run(cli + " sample --model " + model + " --frames nope --out " + q(d / "never.bvh"));
  const int invalid = run(cli + " sample --model " + model + " --frames 100000 --out " + q(d / "never.bvh"));
  o.check(usage == 2 && invalid == 3 && !fs::exists(d / "never.bvh"),
          "bad flags exit 2, out-of-range frames exit 3, nothing written");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::fprintf(stderr, "usage: %s <speakgen binary> <desk config> <work dir> [criterion...]\n", argv[0]);
    return 2;
  }
  const Paths paths{fs::absolute(argv[1]), fs::absolute(argv[2]), fs::absolute(argv[3])};
  fs::create_directories(paths.work);
  std::set<int> only;
  for (int i = 4; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "rotation and feature codec", 10, rotation_and_codec},
      {2, "diffusion math", 60, diffusion_math},
      {3, "classifier-free guidance", 5, guidance},
      {4, "gradient check", 120, gradient_check},
      {5, "toy training", 900, [&] { return toy_training(paths); }},
      {6, "long-sequence composition", 300, [&] { return doubletake_suite(paths); }},
      {7, "metrics", 10, metrics_suite},
      {8, "reproducibility", 600, [&] { return reproducibility(paths); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds <= c.budget_s, "runtime " + fmt(seconds) + " s (budget " + fmt(c.budget_s) + " s)");
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %d %s: %s (%s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
