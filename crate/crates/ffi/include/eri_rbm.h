#ifndef ERI_RBM_H
#define ERI_RBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EriStatus {
  ERI_STATUS_OK = 0,
  ERI_STATUS_NULL_POINTER = 1,
  ERI_STATUS_INVALID_ARGUMENT = 2,
  ERI_STATUS_IO = 3,
  ERI_STATUS_FORMAT = 4,
  ERI_STATUS_DIMENSION = 5,
  ERI_STATUS_PANIC = 6,
} EriStatus;

typedef enum EriModelKind {
  ERI_MODEL_KIND_PLAIN = 0,
  ERI_MODEL_KIND_ERI = 1,
  ERI_MODEL_KIND_DRBM = 2,
  ERI_MODEL_KIND_ORBM = 3,
} EriModelKind;

/**
 * Opaque model handle.
 */
typedef struct EriModel EriModel;

typedef struct EriTrainOptions {
  /**
   * An `EriModelKind` value.
   */
  uint8_t kind;
  size_t hidden;
  size_t bins;
  size_t epochs;
  double eta;
  double momentum;
  size_t batch;
  size_t cd_k;
  double tau;
  uint64_t seed;
  /**
   * Nonzero samples visible units in the negative phase.
   */
  uint8_t gibbs;
} EriTrainOptions;

typedef struct EriModelInfo {
  size_t hidden;
  size_t width;
  size_t height;
  size_t bins;
} EriModelInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *eri_last_error(void);

/**
 * Reference defaults: ERI, H=100, S=18, 200 epochs, eta 1e-3, momentum 0.9,
 * batch 100, CD-1, tau 0.3, seed 42.
 */
struct EriTrainOptions eri_train_options_default(void);

enum EriStatus eri_model_load(const char *path, struct EriModel **out);

enum EriStatus eri_model_save(const struct EriModel *model, const char *path);

/**
 * Releases a handle; NULL is ignored.
 */
void eri_model_free(struct EriModel *model);

enum EriStatus eri_model_kind(const struct EriModel *model, enum EriModelKind *out);

enum EriStatus eri_model_info(const struct EriModel *model, struct EriModelInfo *out);

/**
 * Hidden-unit probabilities for one grayscale image. `out` must hold
 * `hidden` values; pass `out_len` to have it checked.
 */
enum EriStatus eri_model_features(const struct EriModel *model,
                                  const double *pixels,
                                  size_t width,
                                  size_t height,
                                  double tau,
                                  double *out,
                                  size_t out_len);

/**
 * Dominant orientation of an image with `bins` reference angles. `index`
 * is 1-based; `degenerate` is set to 1 for images without gradients.
 */
enum EriStatus eri_dominant_orientation(const double *pixels,
                                        size_t width,
                                        size_t height,
                                        size_t bins,
                                        size_t *index,
                                        double *psi,
                                        uint8_t *degenerate);

/**
 * Rotates an image by `degrees` about its center into `out` (same size).
 */
enum EriStatus eri_rotate(const double *pixels,
                          size_t width,
                          size_t height,
                          double degrees,
                          double *out);

/**
 * Trains on `count` grayscale images stored back to back.
 */
enum EriStatus eri_train(const double *pixels,
                         const uint8_t *labels,
                         size_t count,
                         size_t width,
                         size_t height,
                         const struct EriTrainOptions *options,
                         struct EriModel **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERI_RBM_H */
