#ifndef AUTONOMY_LAB_H
#define AUTONOMY_LAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AlStatus {
  AL_STATUS_OK = 0,
  AL_STATUS_NULL_ARGUMENT = 1,
  AL_STATUS_INVALID_ARGUMENT = 2,
  AL_STATUS_RUNTIME = 3,
  AL_STATUS_BUFFER_TOO_SMALL = 4,
  AL_STATUS_PANIC = 5,
} AlStatus;

/**
 * An elementary cellular automaton row together with its rule.
 */
typedef struct AlEca AlEca;

/**
 * A Turing machine with its input word.
 */
typedef struct AlMachine AlMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Bytes needed to hold the last error message, including the terminator.
 */
size_t al_last_error_length(void);

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string. The message is empty after a successful call.
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum AlStatus al_last_error_message(char *buf, size_t len);

/**
 * New automaton with a seeded uniform random row.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum AlStatus al_eca_new(uint32_t rule, size_t width, uint64_t seed, struct AlEca **out);

/**
 * New automaton from explicit cells, one byte per cell (non-zero is live).
 *
 * # Safety
 * `cells` must point to `width` readable bytes and `out` must be valid.
 */
enum AlStatus al_eca_from_cells(uint32_t rule,
                                const uint8_t *cells,
                                size_t width,
                                struct AlEca **out);

/**
 * Advances the automaton by `steps` synchronous updates.
 *
 * # Safety
 * `eca` must be a live handle.
 */
enum AlStatus al_eca_step(struct AlEca *eca, uint64_t steps);

/**
 * Row width and elapsed steps.
 *
 * # Safety
 * `eca` must be a live handle; outputs may be null when not wanted.
 */
enum AlStatus al_eca_info(const struct AlEca *eca, size_t *width, uint64_t *t);

/**
 * Writes the cells as 0/1 bytes. `len` must be at least the width.
 *
 * # Safety
 * `eca` must be a live handle and `buf` must point to `len` writable bytes.
 */
enum AlStatus al_eca_cells(const struct AlEca *eca, uint8_t *buf, size_t len);

/**
 * Releases an automaton. Null is ignored.
 *
 * # Safety
 * `eca` must be null or a handle not yet freed.
 */
void al_eca_free(struct AlEca *eca);

/**
 * Parses a machine in the compact `1RB1LB_1LA1RZ` notation (blank tape).
 *
 * # Safety
 * `text` must be NUL-terminated and `out` valid.
 */
enum AlStatus al_tm_from_text(const char *text, struct AlMachine **out);

/**
 * Runs at most `budget` steps on the blank tape. `halted` tells whether the
 * machine stopped; `steps` and `accepted` are only meaningful if it did.
 *
 * # Safety
 * `machine` must be a live handle and the outputs valid.
 */
enum AlStatus al_tm_run(const struct AlMachine *machine,
                        uint64_t budget,
                        bool *halted,
                        uint64_t *steps,
                        bool *accepted);

/**
 * Runs the machine as an agent on a tape environment in lockstep with
 * direct simulation for up to `budget` steps.
 *
 * # Safety
 * `machine` must be a live handle and the outputs valid.
 */
enum AlStatus al_tm_embedding_check(const struct AlMachine *machine,
                                    uint64_t budget,
                                    bool *passed,
                                    uint64_t *steps_checked);

/**
 * Releases a machine. Null is ignored.
 *
 * # Safety
 * `machine` must be null or a handle not yet freed.
 */
void al_tm_free(struct AlMachine *machine);

/**
 * Compressed length in bits of `len` bytes under the built-in coder.
 *
 * # Safety
 * `data` must point to `len` readable bytes (may be null when `len` is 0).
 */
enum AlStatus al_compress_bound(const uint8_t *data, size_t len, uint64_t *bits);

/**
 * Plug-in Shannon entropy in bits of a symbol sequence.
 *
 * # Safety
 * `symbols` must point to `len` readable values.
 */
enum AlStatus al_entropy_u32(const uint32_t *symbols, size_t len, double *bits);

/**
 * Runs the experiment described by a config file into `out_dir`. Config
 * problems give `InvalidArgument`, failures during the run `Runtime`.
 *
 * # Safety
 * Both paths must be NUL-terminated strings.
 */
enum AlStatus al_run_experiment(const char *config_path, const char *out_dir, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUTONOMY_LAB_H */
