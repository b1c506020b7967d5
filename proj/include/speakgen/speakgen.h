#ifndef SPEAKGEN_SPEAKGEN_H
#define SPEAKGEN_SPEAKGEN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#else
#define SG_API __attribute__((visibility("default")))
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_USAGE = 2,       /* bad argument passed through the API */
  SG_VALIDATION = 3,  /* input violates an invariant; see sg_last_error() */
  SG_IO = 4,
  SG_INTERNAL = 5
} sg_status;

typedef struct sg_config sg_config;
typedef struct sg_model sg_model;

/* Message for the most recent failure on the calling thread. Never NULL. */
SG_API const char* sg_last_error(void);
SG_API const char* sg_version(void);

/* Warnings (skipped clips, truncated text) go to stderr unless a handler is
   installed. Pass NULL to restore the default. */
typedef void (*sg_warning_fn)(const char* message, void* user);
SG_API void sg_set_warning_handler(sg_warning_fn fn, void* user);

SG_API sg_status sg_config_default(sg_config** out);
SG_API sg_status sg_config_load(const char* path, sg_config** out);
/* "section.key=value"; value is JSON or a bare string. */
SG_API sg_status sg_config_override(sg_config* config, const char* assignment);
/* Writes 64 hex characters plus a terminator. */
SG_API sg_status sg_config_digest(const sg_config* config, char out[65]);
/* Effective config as JSON. The string lives until the next call on this
   config. */
SG_API sg_status sg_config_json(const sg_config* config, const char** out);
SG_API void sg_config_free(sg_config* config);

/* Synthetic wave / walk / still / speech corpus as BVH + txt + wav files. */
typedef struct sg_synth_params {
  int frames;
  int per_family;
  int audio_clips;
  double fps;
} sg_synth_params;
SG_API void sg_synth_defaults(sg_synth_params* params);
SG_API sg_status sg_synth(const char* out_dir, const sg_synth_params* params, uint64_t seed);

SG_API sg_status sg_preprocess(const sg_config* config, const char* bvh_dir, const char* out_dir, uint64_t seed,
                               int* written, int* skipped);

/* Called on every train.log_every-th step and on the last one. */
typedef void (*sg_progress_fn)(int step, double loss, void* user);
SG_API sg_status sg_train(const sg_config* config, const char* data_dir, const char* out_checkpoint, uint64_t seed,
                          sg_progress_fn progress, void* user);

SG_API sg_status sg_model_load(const char* path, sg_model** out);
SG_API void sg_model_free(sg_model* model);

typedef struct sg_sample_params {
  const char* text;        /* NULL or "" for no text */
  const char* audio_path;  /* NULL for no audio */
  int frames;              /* 0: the model's training window */
  double gamma;
  uint64_t seed;
} sg_sample_params;
SG_API sg_status sg_sample(const sg_model* model, const sg_sample_params* params, const char* out_bvh);

SG_API sg_status sg_compose(const sg_model* model, const char* script_path, uint64_t seed, const char* out_bvh);

SG_API sg_status sg_eval(const sg_config* config, const char* generated_dir, const char* reference_dir,
                         const char* report_path);

#ifdef __cplusplus
}
#endif

#endif
