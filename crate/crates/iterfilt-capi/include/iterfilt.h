/* C interface for the iterfilt signal-decomposition library. */

#pragma once

/* Generated with cbindgen:0.26.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How the smoothing loop is executed.
 */
typedef enum IterfiltMode {
  /**
   * Step until the increment norm falls below delta.
   */
  ITERFILT_MODE_ITERATIVE = 0,
  /**
   * Jump to the fixed point: keep only the filter's spectral kernel.
   */
  ITERFILT_MODE_PROJECTION = 1,
  /**
   * Apply a fixed number of steps in closed form.
   */
  ITERFILT_MODE_POWERED = 2,
} IterfiltMode;

/**
 * Base window for the smoothing filter.
 */
typedef enum IterfiltShape {
  ITERFILT_SHAPE_TRIANGULAR = 0,
  ITERFILT_SHAPE_B_SPLINE3 = 1,
} IterfiltShape;

/**
 * Result of a call. Anything but `Ok` leaves a message for
 * [`iterfilt_last_error_message`].
 */
typedef enum IterfiltStatus {
  ITERFILT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ITERFILT_STATUS_NULL_POINTER = 1,
  /**
   * Arguments failed validation (sizes, ranges, non-finite values).
   */
  ITERFILT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed (no admissible mask, unstable filter…).
   */
  ITERFILT_STATUS_COMPUTE_FAILED = 3,
  ITERFILT_STATUS_IO_FAILED = 4,
  /**
   * An index argument was out of range for the object.
   */
  ITERFILT_STATUS_INDEX_OUT_OF_RANGE = 5,
  /**
   * An internal invariant broke; the library state is still consistent.
   */
  ITERFILT_STATUS_PANICKED = 6,
} IterfiltStatus;

/**
 * Why a decomposition stopped extracting components.
 */
typedef enum IterfiltStop {
  /**
   * The residual has fewer than two interior extrema.
   */
  ITERFILT_STOP_EXTREMA_GUARD = 0,
  /**
   * The residual norm hit the floor and was folded into the last component.
   */
  ITERFILT_STOP_NORM_FLOOR = 1,
  /**
   * Mask selection failed after at least one component was extracted.
   */
  ITERFILT_STOP_MASK_FAILED = 2,
  /**
   * The component cap was reached.
   */
  ITERFILT_STOP_COMPONENT_CAP = 3,
} IterfiltStop;

typedef struct IterfiltConfig IterfiltConfig;

typedef struct IterfiltDecomposition IterfiltDecomposition;

typedef struct IterfiltSignal IterfiltSignal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread (empty string
 * if none). The pointer stays valid until the next failing call here.
 */
const char *iterfilt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *iterfilt_version(void);

/**
 * Wraps `len` samples (copied) at the given sample rate into a new handle.
 */
enum IterfiltStatus iterfilt_signal_create(const double *samples,
                                           size_t len,
                                           double sample_rate,
                                           struct IterfiltSignal **out);

/**
 * Samples a unit fast tone plus `amplitude * cos(2π * frequency * t + phase)`
 * over `duration` seconds at `sample_rate` Hz.
 */
enum IterfiltStatus iterfilt_signal_two_tone(double amplitude,
                                             double frequency,
                                             double phase,
                                             double duration,
                                             double sample_rate,
                                             struct IterfiltSignal **out);

enum IterfiltStatus iterfilt_signal_len(const struct IterfiltSignal *signal, size_t *out);

enum IterfiltStatus iterfilt_signal_sample_rate(const struct IterfiltSignal *signal, double *out);

/**
 * Borrows the sample buffer. The pointer is valid while the handle lives
 * and must not be freed by the caller.
 */
enum IterfiltStatus iterfilt_signal_data(const struct IterfiltSignal *signal,
                                         const double **out_samples,
                                         size_t *out_len);

/**
 * Frees a signal handle. Null is accepted and ignored.
 */
void iterfilt_signal_destroy(struct IterfiltSignal *signal);

/**
 * Benchmark-calibrated defaults with the adaptive extrema mask.
 */
enum IterfiltStatus iterfilt_config_standard(struct IterfiltConfig **out);

/**
 * Extreme-iteration preset (delta 1e-20, ten million closed-form steps).
 */
enum IterfiltStatus iterfilt_config_stress(struct IterfiltConfig **out);

enum IterfiltStatus iterfilt_config_set_delta(struct IterfiltConfig *config, double delta);

enum IterfiltStatus iterfilt_config_set_max_iterations(struct IterfiltConfig *config,
                                                       uint64_t max_iterations);

enum IterfiltStatus iterfilt_config_set_max_components(struct IterfiltConfig *config,
                                                       size_t max_components);

enum IterfiltStatus iterfilt_config_set_mode(struct IterfiltConfig *config, enum IterfiltMode mode);

enum IterfiltStatus iterfilt_config_set_filter_shape(struct IterfiltConfig *config,
                                                     enum IterfiltShape shape);

/**
 * Adaptive mask sized from the residual's extrema count. Pass a
 * non-positive `nu` to keep the calibrated default.
 */
enum IterfiltStatus iterfilt_config_set_mask_extrema(struct IterfiltConfig *config, double nu);

/**
 * Mask with a spectral zero pinned at `target_frequency` (Hz).
 */
enum IterfiltStatus iterfilt_config_set_mask_ideal(struct IterfiltConfig *config,
                                                   double target_frequency);

/**
 * Extrema mask measured on the `order`-th finite difference of the
 * residual. Pass a non-positive `nu` to keep the calibrated default.
 */
enum IterfiltStatus iterfilt_config_set_mask_derivative(struct IterfiltConfig *config,
                                                        size_t order,
                                                        double nu);

/**
 * Frees a config handle. Null is accepted and ignored.
 */
void iterfilt_config_destroy(struct IterfiltConfig *config);

/**
 * Runs the full outer loop and returns a result handle.
 */
enum IterfiltStatus iterfilt_decompose(const struct IterfiltSignal *signal,
                                       const struct IterfiltConfig *config,
                                       struct IterfiltDecomposition **out);

enum IterfiltStatus iterfilt_decomposition_component_count(const struct IterfiltDecomposition *decomposition,
                                                           size_t *out);

/**
 * Copies component `index` (0-based, ordered fast to slow) into a new
 * signal handle owned by the caller.
 */
enum IterfiltStatus iterfilt_decomposition_component(const struct IterfiltDecomposition *decomposition,
                                                     size_t index,
                                                     struct IterfiltSignal **out);

/**
 * Copies the non-oscillatory remainder into a new signal handle.
 */
enum IterfiltStatus iterfilt_decomposition_remainder(const struct IterfiltDecomposition *decomposition,
                                                     struct IterfiltSignal **out);

enum IterfiltStatus iterfilt_decomposition_stop(const struct IterfiltDecomposition *decomposition,
                                                enum IterfiltStop *out);

/**
 * Inner steps spent on component `index` (0 marks the projection limit).
 */
enum IterfiltStatus iterfilt_decomposition_component_iterations(const struct IterfiltDecomposition *decomposition,
                                                                size_t index,
                                                                uint64_t *out);

/**
 * Half-length of the filter that extracted component `index`.
 */
enum IterfiltStatus iterfilt_decomposition_component_mask_half_length(const struct IterfiltDecomposition *decomposition,
                                                                      size_t index,
                                                                      size_t *out);

/**
 * Frees a decomposition handle. Null is accepted and ignored.
 */
void iterfilt_decomposition_destroy(struct IterfiltDecomposition *decomposition);

/**
 * Two-tone separation error of a candidate first component: the norm of its
 * deviation from the unit fast tone, relative to the norm of the slow tone.
 * `duration` and `sample_rate` must match the signal the component came from.
 */
enum IterfiltStatus iterfilt_c1_metric(const struct IterfiltSignal *component,
                                       double amplitude,
                                       double frequency,
                                       double phase,
                                       double duration,
                                       double sample_rate,
                                       double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus
