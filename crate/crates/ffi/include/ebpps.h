#ifndef EBPPS_H
#define EBPPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EbppsStatus {
  EBPPS_STATUS_OK = 0,
  EBPPS_STATUS_NULL_POINTER = 1,
  EBPPS_STATUS_INVALID_WEIGHT = 2,
  EBPPS_STATUS_INVALID_PARAMETER = 3,
  EBPPS_STATUS_PRECONDITION = 4,
  EBPPS_STATUS_BUFFER_TOO_SMALL = 5,
  EBPPS_STATUS_SNAPSHOT = 6,
  EBPPS_STATUS_PANIC = 7,
} EbppsStatus;

typedef struct EbppsSampler EbppsSampler;

/**
 * Running statistics of a sampler.
 */
typedef struct EbppsStats {
  uint64_t bound;
  uint64_t items_seen;
  uint64_t total_discards;
  double total_weight;
  /**
   * 0 before the first item.
   */
  double max_weight;
  double rho;
  double latent_size;
  double expected_size;
} EbppsStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a sampler with sample-size bound `bound`. On success `*out_sampler`
 * receives a handle owned by the caller.
 */
enum EbppsStatus ebpps_sampler_new(uint64_t bound,
                                   uint64_t seed,
                                   struct EbppsSampler **out_sampler);

/**
 * Releases a handle. Null is ignored.
 */
void ebpps_sampler_free(struct EbppsSampler *sampler);

/**
 * Feeds one item. On error the sampler is unchanged.
 */
enum EbppsStatus ebpps_sampler_process(struct EbppsSampler *sampler, uint64_t id, double weight);

/**
 * Draws a sample into `ids`. A capacity of at least the bound always
 * suffices. `*out_len` receives the sample size; if it exceeds `capacity`
 * nothing is written and `EBPPS_STATUS_BUFFER_TOO_SMALL` is returned.
 */
enum EbppsStatus ebpps_sampler_extract(struct EbppsSampler *sampler,
                                       uint64_t *ids,
                                       size_t capacity,
                                       size_t *out_len);

enum EbppsStatus ebpps_sampler_stats(const struct EbppsSampler *sampler,
                                     struct EbppsStats *out_stats);

/**
 * Current inclusion probability of an item of weight `weight`.
 */
enum EbppsStatus ebpps_sampler_inclusion_probability(const struct EbppsSampler *sampler,
                                                     double weight,
                                                     double *out_probability);

/**
 * Serializes the sampler as UTF-8 JSON, without a terminating NUL.
 * `*out_len` always receives the required size; pass a null `buf` to query
 * it.
 */
enum EbppsStatus ebpps_sampler_snapshot(const struct EbppsSampler *sampler,
                                        uint8_t *buf,
                                        size_t capacity,
                                        size_t *out_len);

/**
 * Rebuilds a sampler from [`ebpps_sampler_snapshot`] output.
 */
enum EbppsStatus ebpps_sampler_restore(const uint8_t *buf,
                                       size_t len,
                                       struct EbppsSampler **out_sampler);

/**
 * Threshold PPS scale for expected size `bound`. When `out_inclusion` is
 * not null it receives `len` inclusion probabilities.
 */
enum EbppsStatus ebpps_threshold_tau(const double *weights,
                                     size_t len,
                                     uint64_t bound,
                                     double *out_tau,
                                     double *out_inclusion);

/**
 * Static, NUL-terminated description of a status code.
 */
const char *ebpps_status_str(enum EbppsStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBPPS_H */
