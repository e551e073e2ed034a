#ifndef CKNET_H
#define CKNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every FFI call.
 */
typedef enum {
  CK_OK = 0,
  /**
   * Bad arguments or unknown parameter names.
   */
  CK_USAGE = 1,
  /**
   * File or JSON payload failed to parse.
   */
  CK_PARSE = 2,
  /**
   * A net violates a structural invariant or failed validation.
   */
  CK_INVARIANT = 3,
  /**
   * Numerical degeneracy (singular matrix, degenerate angle or quad).
   */
  CK_NUMERIC = 4,
  /**
   * A required pointer argument was null.
   */
  CK_NULL_POINTER = 5,
  /**
   * Unexpected internal failure.
   */
  CK_INTERNAL = 6,
} CkStatus;

/**
 * Opaque quad-net handle.
 */
typedef struct CkNet CkNet;

/**
 * Summary residuals of the standard checks at a given tolerance.
 */
typedef struct {
  double max_edge_residual;
  double max_curvature_defect;
  double max_cross_ratio_imag;
  /**
   * 1 when every residual is within tolerance.
   */
  uint8_t pass;
} CkValidation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the underlying library; statically allocated.
 */
const char *cknet_version(void);

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cknet_last_error(void);

/**
 * Generate a closed-form surface.
 *
 * `surface` names the generator (`line`, `pseudosphere`, `dini`,
 * `pseudosphere-family`, `breather`, `kuen`); `params_json` optionally
 * carries the remaining parameters as a JSON object with the same keys as
 * the CLI flags (`dims` as "KxL", angles in radians), or may be null.
 *
 * # Safety
 * `surface` and `params_json` must be null or valid NUL-terminated
 * strings; `out` must point to writable storage for one pointer.
 */
CkStatus cknet_generate(const char *surface, const char *params_json, CkNet **out);

/**
 * Read a net from a JSON file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must point to
 * writable storage for one pointer.
 */
CkStatus cknet_net_read_json(const char *path, CkNet **out);

/**
 * Write a net to a JSON file.
 *
 * # Safety
 * `net` must be a live handle from this library; `path` a valid string.
 */
CkStatus cknet_net_write_json(const CkNet *net, const char *path);

/**
 * Export a net as a Wavefront OBJ mesh.
 *
 * # Safety
 * `net` must be a live handle from this library; `path` a valid string.
 */
CkStatus cknet_net_export_obj(const CkNet *net, const char *path);

/**
 * Window size of a net.
 *
 * # Safety
 * All pointers must be valid; `net` must be a live handle.
 */
CkStatus cknet_net_dims(const CkNet *net, uint32_t *k, uint32_t *l);

/**
 * Position and unit normal of the vertex at (k, l); each output array
 * receives three doubles.
 *
 * # Safety
 * `net` must be a live handle; `f` and `n` must each point to at least
 * three writable doubles.
 */
CkStatus cknet_net_vertex(const CkNet *net, uint32_t k, uint32_t l, double *f, double *n);

/**
 * Run the standard checks (edge constraint, curvature defect |K + 1|,
 * cross-ratio circularity) and report the worst residuals.
 *
 * # Safety
 * `net` must be a live handle; `out` must point to writable storage.
 */
CkStatus cknet_net_validate(const CkNet *net, double tol, CkValidation *out);

/**
 * Release a handle created by this library; null is a no-op.
 *
 * # Safety
 * `net` must be null or a pointer previously returned by a `cknet_*`
 * constructor that has not been freed before.
 */
void cknet_net_free(CkNet *net);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CKNET_H */
