#ifndef ODO_H
#define ODO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OdoStatus {
  ODO_STATUS_OK = 0,
  ODO_STATUS_NULL_POINTER = 1,
  ODO_STATUS_INVALID_UTF8 = 2,
  ODO_STATUS_CONFIG_PARSE = 3,
  ODO_STATUS_CONFIG_INVALID = 4,
  ODO_STATUS_PANIC = 5,
} OdoStatus;

/**
 * Opaque odometer configuration.
 */
typedef struct OdoConfigHandle OdoConfigHandle;

/**
 * Opaque odometer instance. Owns a copy of its configuration.
 */
typedef struct OdoMachine OdoMachine;

/**
 * One sample of the three encoder lines.
 */
typedef struct OdoPhaseCode {
  bool c1;
  bool c2;
  bool c3;
} OdoPhaseCode;

/**
 * Outputs of one odometer step. Word fields carry the raw 32-bit values.
 */
typedef struct OdoStepOutput {
  bool odometer_status;
  bool odometric_position_valid;
  uint32_t odometric_position_count;
  uint32_t odometric_position_timestamp;
  uint32_t last_marker_position;
  uint32_t last_marker_timestamp;
  /**
   * Millimetres.
   */
  uint32_t relative_position;
  int32_t speed;
  int32_t acceleration;
  int32_t jerk;
  uint32_t cinematics_timestamp;
} OdoStepOutput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code.
 */
const char *odo_status_message(enum OdoStatus status);

/**
 * Config reproducing the reference replay transcript. Free with `odo_config_free`.
 */
struct OdoConfigHandle *odo_config_transcript_default(void);

/**
 * Physically derived config (100 teeth, 0.9 m wheel, 10 ms). Free with `odo_config_free`.
 */
struct OdoConfigHandle *odo_config_physical_default(void);

/**
 * Parses JSON overrides on top of the physical default.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum OdoStatus odo_config_from_json(const char *json, struct OdoConfigHandle **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. Null is ignored.
 */
void odo_config_free(struct OdoConfigHandle *config);

/**
 * Creates an odometer starting at table row `init` (taken modulo 6).
 *
 * # Safety
 * `config` must be a live handle and `out` a writable pointer.
 */
enum OdoStatus odo_machine_new(const struct OdoConfigHandle *config,
                               uint64_t init,
                               struct OdoMachine **out);

/**
 * Feeds one sample and writes the resulting outputs.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum OdoStatus odo_machine_step(struct OdoMachine *machine,
                                struct OdoPhaseCode code,
                                bool marker,
                                struct OdoStepOutput *out);

/**
 * # Safety
 * `machine` must come from this library and not be used afterwards. Null is ignored.
 */
void odo_machine_free(struct OdoMachine *machine);

/**
 * Code at table row `n mod 6`.
 */
struct OdoPhaseCode odo_phase0(uint64_t n);

/**
 * Code for one-based index `x` (0 behaves like 1).
 */
struct OdoPhaseCode odo_phase(uint64_t x);

/**
 * True when `last -> cur` is neither a stay nor a single step.
 */
bool odo_seq_fault(struct OdoPhaseCode last, struct OdoPhaseCode cur);

/**
 * True for the all-high and all-low codes.
 */
bool odo_is_code_error(struct OdoPhaseCode code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODO_H */
