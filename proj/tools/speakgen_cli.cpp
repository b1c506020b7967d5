#include <speakgen/speakgen.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2;
constexpr int kIo = 4;

struct ConfigFlags {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags, bool required) {
  auto* opt = cmd->add_option("--config", flags.path, "engine config JSON");
  if (required) opt->required();
  cmd->add_option("--set", flags.overrides, "override a config key, e.g. model.hidden_dim=64")->take_all();
}

int report(sg_status status) {
  if (status != SG_OK) std::fprintf(stderr, "error: %s\n", sg_last_error());
  return static_cast<int>(status);
}

class Config {
 public:
  ~Config() { sg_config_free(handle_); }
  sg_status open(const ConfigFlags& flags) {
    const sg_status s = flags.path.empty() ? sg_config_default(&handle_) : sg_config_load(flags.path.c_str(), &handle_);
    if (s != SG_OK) return s;
    for (const auto& o : flags.overrides)
      if (const sg_status e = sg_config_override(handle_, o.c_str()); e != SG_OK) return e;
    return SG_OK;
  }
  const sg_config* get() const { return handle_; }

 private:
  sg_config* handle_ = nullptr;
};

class Model {
 public:
  ~Model() { sg_model_free(handle_); }
  sg_status open(const std::string& path) { return sg_model_load(path.c_str(), &handle_); }
  const sg_model* get() const { return handle_; }

 private:
  sg_model* handle_ = nullptr;
};

// Output files go into existing directories only; checking up front keeps a
// long run from failing at the final write.
std::optional<int> check_output_parent(const std::string& out) {
  const fs::path parent = fs::absolute(out).parent_path();
  std::error_code ec;
  if (fs::is_directory(parent, ec)) return std::nullopt;
  std::fprintf(stderr, "error: output directory does not exist: %s\n", parent.string().c_str());
  return kIo;
}

std::optional<int> check_input_file(const std::string& path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) return std::nullopt;
  std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
  return kIo;
}

void print_progress(int step, double loss, void*) {
  std::printf("step %d loss %.6f\n", step, loss);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text- and speech-conditioned motion diffusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sg_version()));

  ConfigFlags pre_cfg;
  std::string pre_bvh, pre_out;
  std::uint64_t pre_seed = 0;
  auto* pre = app.add_subcommand("preprocess", "parse, canonicalize and encode a BVH directory");
  add_config_flags(pre, pre_cfg, true);
  pre->add_option("--bvh-dir", pre_bvh, "directory of .bvh files with optional .txt/.wav sidecars")->required();
  pre->add_option("--out", pre_out, "dataset directory")->required();
  pre->add_option("--seed", pre_seed, "split seed");

  ConfigFlags train_cfg;
  std::string train_data, train_out;
  std::uint64_t train_seed = 0;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "fit normalizers and train the denoiser");
  add_config_flags(train, train_cfg, true);
  train->add_option("--data", train_data, "dataset directory from preprocess")->required();
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--seed", train_seed, "initialization and batching seed");
  train->add_flag("--quiet", quiet, "no progress lines");

  std::string s_model, s_text, s_audio, s_out;
  int s_frames = 0;
  double s_gamma = 1.0;
  std::uint64_t s_seed = 0;
  auto* sample = app.add_subcommand("sample", "generate one clip");
  sample->add_option("--model", s_model, "checkpoint")->required();
  sample->add_option("--text", s_text, "text prompt");
  sample->add_option("--audio", s_audio, "16 kHz mono 16-bit WAV");
  sample->add_option("--frames", s_frames, "clip length (default: training window)")->check(CLI::NonNegativeNumber);
  sample->add_option("--gamma", s_gamma, "guidance weight; 0 ignores the text");
  sample->add_option("--seed", s_seed, "noise seed");
  sample->add_option("--out", s_out, "output BVH")->required();

  std::string c_model, c_script, c_out;
  std::uint64_t c_seed = 0;
  auto* comp = app.add_subcommand("compose", "generate a long sequence from a segment script");
  comp->add_option("--model", c_model, "checkpoint")->required();
  comp->add_option("--script", c_script, "JSON array of {text, audio, frames, gamma}")->required();
  comp->add_option("--seed", c_seed, "noise seed");
  comp->add_option("--out", c_out, "output BVH; boundary metadata goes to <out>.json")->required();

  ConfigFlags e_cfg;
  std::string e_gen, e_ref, e_report;
  auto* ev = app.add_subcommand("eval", "compare generated and reference BVH sets");
  add_config_flags(ev, e_cfg, false);
  ev->add_option("--generated", e_gen, "directory of generated .bvh")->required();
  ev->add_option("--reference", e_ref, "directory of reference .bvh")->required();
  ev->add_option("--report", e_report, "report JSON")->required();

  sg_synth_params synth_params;
  sg_synth_defaults(&synth_params);
  std::string y_out;
  std::uint64_t y_seed = 0;
  auto* synth = app.add_subcommand("synth", "write the synthetic toy corpus");
  synth->add_option("--out", y_out, "output directory")->required();
  synth->add_option("--seed", y_seed, "corpus seed");
  synth->add_option("--frames", synth_params.frames, "frames per clip")->check(CLI::PositiveNumber);
  synth->add_option("--per-family", synth_params.per_family, "text clips per family")->check(CLI::NonNegativeNumber);
  synth->add_option("--audio-clips", synth_params.audio_clips, "speech clips")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*pre) {
    Config cfg;
    if (const sg_status s = cfg.open(pre_cfg); s != SG_OK) return report(s);
    int written = 0, skipped = 0;
    const sg_status s = sg_preprocess(cfg.get(), pre_bvh.c_str(), pre_out.c_str(), pre_seed, &written, &skipped);
    if (s == SG_OK) std::printf("wrote %d entries, skipped %d\n", written, skipped);
    return report(s);
  }
  if (*train) {
    Config cfg;
    if (const sg_status s = cfg.open(train_cfg); s != SG_OK) return report(s);
    if (auto e = check_output_parent(train_out)) return *e;
    sg_progress_fn progress = nullptr;
    if (!quiet) progress = print_progress;
    return report(sg_train(cfg.get(), train_data.c_str(), train_out.c_str(), train_seed, progress, nullptr));
  }
  if (*sample) {
    if (auto e = check_input_file(s_model)) return *e;
    if (!s_audio.empty())
      if (auto e = check_input_file(s_audio)) return *e;
    if (auto e = check_output_parent(s_out)) return *e;
    Model model;
    if (const sg_status s = model.open(s_model); s != SG_OK) return report(s);
    const sg_sample_params params{s_text.c_str(), s_audio.empty() ? nullptr : s_audio.c_str(), s_frames, s_gamma,
                                  s_seed};
    return report(sg_sample(model.get(), &params, s_out.c_str()));
  }
  if (*comp) {
    if (auto e = check_input_file(c_model)) return *e;
    if (auto e = check_input_file(c_script)) return *e;
    if (auto e = check_output_parent(c_out)) return *e;
    Model model;
    if (const sg_status s = model.open(c_model); s != SG_OK) return report(s);
    return report(sg_compose(model.get(), c_script.c_str(), c_seed, c_out.c_str()));
  }
  if (*ev) {
    Config cfg;
    if (const sg_status s = cfg.open(e_cfg); s != SG_OK) return report(s);
    if (auto e = check_output_parent(e_report)) return *e;
    return report(sg_eval(cfg.get(), e_gen.c_str(), e_ref.c_str(), e_report.c_str()));
  }
  return report(sg_synth(y_out.c_str(), &synth_params, y_seed));
}
