/* Copyright 2026 The PGPC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PGPC_PGPC_H_
#define PGPC_PGPC_H_

/* C interface to the pgpc library. All handles are opaque. Functions return
 * a pgpc_status; on failure pgpc_last_error() describes the problem for the
 * calling thread until its next failing call. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define PGPC_API __attribute__((visibility("default")))
#else
#define PGPC_API
#endif

typedef enum pgpc_status {
  PGPC_OK = 0,
  PGPC_ERR_INVALID_ARGUMENT = 1,
  PGPC_ERR_CONFIG = 2,
  PGPC_ERR_IO = 3,
  PGPC_ERR_RUNTIME = 4,
} pgpc_status;

typedef struct pgpc_config pgpc_config;
typedef struct pgpc_trainer pgpc_trainer;

typedef struct pgpc_loss_report {
  int64_t iteration;
  double l_s;
  double l_t;
  double l_c;
  double total;
  int32_t anchors_used;
  int32_t negatives_used;
  int32_t skipped_classes;
} pgpc_loss_report;

PGPC_API const char* pgpc_last_error(void);
PGPC_API const char* pgpc_version(void);

/* Configuration. Keys and the file grammar are listed in docs/FORMATS.md. */
PGPC_API pgpc_status pgpc_config_create(pgpc_config** out);
PGPC_API pgpc_status pgpc_config_load(const char* path, pgpc_config** out);
PGPC_API pgpc_status pgpc_config_parse(const char* text, pgpc_config** out);
PGPC_API pgpc_status pgpc_config_clone(const pgpc_config* config,
                                       pgpc_config** out);
PGPC_API void pgpc_config_destroy(pgpc_config* config);
PGPC_API pgpc_status pgpc_config_set(pgpc_config* config, const char* key,
                                     const char* value);
/* Applies a variant such as "sp+sn+tn". */
PGPC_API pgpc_status pgpc_config_set_variant(pgpc_config* config,
                                             const char* variant);
/* String outputs: writes at most `capacity` bytes including the terminator
 * and stores the full length (without terminator) in *needed if non-null.
 * Returns PGPC_ERR_INVALID_ARGUMENT when the buffer is too small. A null
 * buffer with capacity 0 is a pure size query. */
PGPC_API pgpc_status pgpc_config_get(const pgpc_config* config, const char* key,
                                     char* buffer, size_t capacity,
                                     size_t* needed);
PGPC_API pgpc_status pgpc_config_to_text(const pgpc_config* config,
                                         char* buffer, size_t capacity,
                                         size_t* needed);
PGPC_API pgpc_status pgpc_config_validate(const pgpc_config* config);
PGPC_API pgpc_status pgpc_config_hash(const pgpc_config* config,
                                      uint64_t* out);

/* Training. */
PGPC_API pgpc_status pgpc_trainer_create(const pgpc_config* config,
                                         uint64_t seed, pgpc_trainer** out);
PGPC_API pgpc_status pgpc_trainer_load(const char* checkpoint_path,
                                       pgpc_trainer** out);
PGPC_API void pgpc_trainer_destroy(pgpc_trainer* trainer);
PGPC_API pgpc_status pgpc_trainer_step(pgpc_trainer* trainer,
                                       pgpc_loss_report* report);
/* Steps until the iteration counter reaches `until`. When `metrics_csv` is
 * non-null one row per step is appended to it; the header is written first
 * if the file is empty or missing. */
PGPC_API pgpc_status pgpc_trainer_run(pgpc_trainer* trainer, int64_t until,
                                      const char* metrics_csv);
PGPC_API pgpc_status pgpc_trainer_iteration(const pgpc_trainer* trainer,
                                            int64_t* out);
PGPC_API pgpc_status pgpc_trainer_total_iters(const pgpc_trainer* trainer,
                                              int64_t* out);
PGPC_API pgpc_status pgpc_trainer_save(const pgpc_trainer* trainer,
                                       const char* checkpoint_path);
/* Held-out target mIoU. `per_class` (may be null) receives `capacity`
 * entries; classes absent from the ground truth are reported as NaN. */
PGPC_API pgpc_status pgpc_trainer_evaluate(const pgpc_trainer* trainer,
                                           double* miou, double* per_class,
                                           size_t capacity);
/* Evaluates and writes the JSON summary (per-class IoU, mIoU, config). */
PGPC_API pgpc_status pgpc_trainer_write_summary(const pgpc_trainer* trainer,
                                                const char* path);
/* Number of target-label reads through the training path (always 0 unless
 * the information-flow contract is broken). */
PGPC_API pgpc_status pgpc_trainer_label_violations(const pgpc_trainer* trainer,
                                                   int64_t* out);

/* Experiments. Reports go below `out_dir`. A failed cell is marked in the
 * reports and turns the result into PGPC_ERR_RUNTIME. */
PGPC_API pgpc_status pgpc_run_ablation(const pgpc_config* config,
                                       const uint64_t* seeds, size_t num_seeds,
                                       const char* out_dir);
PGPC_API pgpc_status pgpc_run_sweep(const pgpc_config* config,
                                    const char* parameter,
                                    const char* const* values,
                                    size_t num_values, const uint64_t* seeds,
                                    size_t num_seeds, const char* out_dir);
/* Writes split "source", "target" or "test" in the grid record format. */
PGPC_API pgpc_status pgpc_dump_dataset(const pgpc_config* config,
                                       uint64_t seed, const char* split,
                                       const char* path);

#ifdef __cplusplus
}
#endif

#endif /* PGPC_PGPC_H_ */
