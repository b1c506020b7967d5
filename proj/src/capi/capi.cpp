#include "speakgen/speakgen.h"

#include <exception>
#include <iostream>
#include <new>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"
#include "engine/commands.hpp"

using namespace speakgen;

struct sg_config {
  nlohmann::json json;
  engine::EngineConfig config;
  std::string dump;
};

struct sg_model {
  engine::LoadedModel loaded;
};

namespace {

thread_local std::string last_error;

sg_status fail(sg_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
sg_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SG_OK;
  } catch (const IoError& e) {
    return fail(SG_IO, e.what());
  } catch (const ValidationError& e) {
    return fail(SG_VALIDATION, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SG_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SG_INTERNAL, e.what());
  } catch (...) {
    return fail(SG_INTERNAL, "unknown error");
  }
}

sg_status missing(const char* what) { return fail(SG_USAGE, std::string(what) + " must not be NULL"); }

}  // namespace

extern "C" {

const char* sg_last_error(void) { return last_error.c_str(); }

const char* sg_version(void) { return "0.1.0"; }

void sg_set_warning_handler(sg_warning_fn fn, void* user) {
  if (fn == nullptr) {
    set_warning_sink([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
    return;
  }
  set_warning_sink([fn, user](const std::string& m) { fn(m.c_str(), user); });
}

sg_status sg_config_default(sg_config** out) {
  if (out == nullptr) return missing("out");
  return guarded([&] {
    auto* c = new sg_config;
    c->json = engine::to_json(c->config);
    *out = c;
  });
}

sg_status sg_config_load(const char* path, sg_config** out) {
  if (path == nullptr) return missing("path");
  if (out == nullptr) return missing("out");
  return guarded([&] {
    auto* c = new sg_config;
    try {
      c->config = engine::load_config(path);
    } catch (...) {
      delete c;
      throw;
    }
    c->json = engine::to_json(c->config);
    *out = c;
  });
}

sg_status sg_config_override(sg_config* config, const char* assignment) {
  if (config == nullptr) return missing("config");
  if (assignment == nullptr) return missing("assignment");
  return guarded([&] {
    nlohmann::json j = config->json;
    engine::apply_override(j, assignment);
    engine::EngineConfig parsed = engine::config_from_json(j);
    parsed.validate();
    config->config = parsed;
    config->json = engine::to_json(parsed);
  });
}

sg_status sg_config_digest(const sg_config* config, char out[65]) {
  if (config == nullptr) return missing("config");
  if (out == nullptr) return missing("out");
  return guarded([&] {
    const std::string d = engine::config_digest(config->config);
    d.copy(out, 64);
    out[64] = '\0';
  });
}

sg_status sg_config_json(const sg_config* config, const char** out) {
  if (config == nullptr) return missing("config");
  if (out == nullptr) return missing("out");
  return guarded([&] {
    auto* c = const_cast<sg_config*>(config);
    c->dump = c->json.dump(2);
    *out = c->dump.c_str();
  });
}

void sg_config_free(sg_config* config) { delete config; }

void sg_synth_defaults(sg_synth_params* params) {
  if (params == nullptr) return;
  const dataset::SyntheticConfig d;
  params->frames = d.frames;
  params->per_family = d.per_family;
  params->audio_clips = d.audio_clips;
  params->fps = d.fps;
}

sg_status sg_synth(const char* out_dir, const sg_synth_params* params, uint64_t seed) {
  if (out_dir == nullptr) return missing("out_dir");
  if (params == nullptr) return missing("params");
  return guarded([&] {
    dataset::SyntheticConfig c;
    c.frames = params->frames;
    c.per_family = params->per_family;
    c.audio_clips = params->audio_clips;
    c.fps = params->fps;
    engine::synthesize_corpus(out_dir, c, seed);
  });
}

sg_status sg_preprocess(const sg_config* config, const char* bvh_dir, const char* out_dir, uint64_t seed,
                        int* written, int* skipped) {
  if (config == nullptr) return missing("config");
  if (bvh_dir == nullptr) return missing("bvh_dir");
  if (out_dir == nullptr) return missing("out_dir");
  return guarded([&] {
    const auto s = engine::preprocess(config->config, bvh_dir, out_dir, seed);
    if (written != nullptr) *written = s.written;
    if (skipped != nullptr) *skipped = s.skipped;
  });
}

sg_status sg_train(const sg_config* config, const char* data_dir, const char* out_checkpoint, uint64_t seed,
                   sg_progress_fn progress, void* user) {
  if (config == nullptr) return missing("config");
  if (data_dir == nullptr) return missing("data_dir");
  if (out_checkpoint == nullptr) return missing("out_checkpoint");
  return guarded([&] {
    engine::TrainProgress cb;
    const int every = config->config.log_every;
    const int last = config->config.train_steps - 1;
    if (progress != nullptr)
      cb = [progress, user, every, last](int step, double loss) {
        if (step % every == 0 || step == last) progress(step, loss, user);
      };
    const auto outcome = engine::train_model(config->config, data_dir, seed, cb);
    engine::write_training_outputs(out_checkpoint, outcome);
  });
}

sg_status sg_model_load(const char* path, sg_model** out) {
  if (path == nullptr) return missing("path");
  if (out == nullptr) return missing("out");
  return guarded([&] { *out = new sg_model{engine::open_model(path)}; });
}

void sg_model_free(sg_model* model) { delete model; }

sg_status sg_sample(const sg_model* model, const sg_sample_params* params, const char* out_bvh) {
  if (model == nullptr) return missing("model");
  if (params == nullptr) return missing("params");
  if (out_bvh == nullptr) return missing("out_bvh");
  return guarded([&] {
    engine::SampleRequest r;
    if (params->text != nullptr) r.text = params->text;
    if (params->audio_path != nullptr) r.audio = params->audio_path;
    r.frames = params->frames;
    r.gamma = params->gamma;
    r.seed = params->seed;
    engine::run_sample(model->loaded, r, out_bvh);
  });
}

sg_status sg_compose(const sg_model* model, const char* script_path, uint64_t seed, const char* out_bvh) {
  if (model == nullptr) return missing("model");
  if (script_path == nullptr) return missing("script_path");
  if (out_bvh == nullptr) return missing("out_bvh");
  return guarded([&] { engine::run_compose(model->loaded, script_path, seed, out_bvh); });
}

sg_status sg_eval(const sg_config* config, const char* generated_dir, const char* reference_dir,
                  const char* report_path) {
  if (config == nullptr) return missing("config");
  if (generated_dir == nullptr) return missing("generated_dir");
  if (reference_dir == nullptr) return missing("reference_dir");
  if (report_path == nullptr) return missing("report_path");
  return guarded([&] { engine::run_eval(config->config, generated_dir, reference_dir, report_path); });
}

}  // extern "C"
