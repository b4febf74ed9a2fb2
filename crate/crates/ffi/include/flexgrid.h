#ifndef FLEXGRID_H
#define FLEXGRID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlexgridStatus {
  FLEXGRID_STATUS_OK = 0,
  FLEXGRID_STATUS_NULL_POINTER = 1,
  FLEXGRID_STATUS_INVALID_ARGUMENT = 2,
  FLEXGRID_STATUS_DIMENSION_MISMATCH = 3,
  FLEXGRID_STATUS_NON_FINITE = 4,
  FLEXGRID_STATUS_BUFFER_TOO_SMALL = 5,
  FLEXGRID_STATUS_INTERNAL = 6,
  FLEXGRID_STATUS_PANIC = 7,
} FlexgridStatus;

typedef enum FlexgridVariant {
  // Grid that re-partitions its slabs as data shifts.
  FLEXGRID_VARIANT_FLEXFLOOD = 0,
  // Same grid with re-partitioning disabled.
  FLEXGRID_VARIANT_UPDATABLE_FLOOD = 1,
  // Grid rebuilt from scratch every `delta_k` updates.
  FLEXGRID_VARIANT_DELTA_BUFFER = 2,
} FlexgridVariant;

// Opaque index handle.
typedef struct FlexgridIndex FlexgridIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *flexgrid_last_error(void);

// Builds an index over `n` points stored row-major in `points`
// (`n * dims` doubles). `counts` gives the slab count per axis and may be
// null, in which case a layout is derived from the data. `delta_k` is the
// rebuild period of the delta-buffer variant and ignored otherwise.
//
// # Safety
// `points` must hold `n * dims` doubles, `counts` (if non-null) `dims`
// values, and `out` must be writable.
enum FlexgridStatus flexgrid_build(size_t dims,
                                   const double *points,
                                   size_t n,
                                   size_t sort_dim,
                                   const size_t *counts,
                                   enum FlexgridVariant variant,
                                   size_t delta_k,
                                   struct FlexgridIndex **out);

// Releases an index. Null is ignored.
//
// # Safety
// `index` must come from `flexgrid_build` and not be used afterwards.
void flexgrid_free(struct FlexgridIndex *index);

// Inserts a point; `inserted` is false when it was already present.
//
// # Safety
// `coords` must hold `dims` doubles; `inserted` may be null.
enum FlexgridStatus flexgrid_insert(struct FlexgridIndex *index,
                                    const double *coords,
                                    bool *inserted);

// Erases a point; `erased` is false when it was absent.
//
// # Safety
// `coords` must hold `dims` doubles; `erased` may be null.
enum FlexgridStatus flexgrid_erase(struct FlexgridIndex *index, const double *coords, bool *erased);

// # Safety
// `coords` must hold `dims` doubles and `found` must be writable.
enum FlexgridStatus flexgrid_contains(const struct FlexgridIndex *index,
                                      const double *coords,
                                      bool *found);

// Writes the points inside the closed box `[lo, hi]` to `out_points`
// (row-major, room for `capacity` points) and their number to `count`.
// When more than `capacity` points match, nothing is written to
// `out_points`, `count` receives the required capacity and the call returns
// `FLEXGRID_STATUS_BUFFER_TOO_SMALL`.
//
// # Safety
// `lo` and `hi` must hold `dims` doubles, `out_points` room for
// `capacity * dims` doubles (may be null when `capacity` is 0).
enum FlexgridStatus flexgrid_search(const struct FlexgridIndex *index,
                                    const double *lo,
                                    const double *hi,
                                    double *out_points,
                                    size_t capacity,
                                    size_t *count);

// # Safety
// `len` must be writable.
enum FlexgridStatus flexgrid_len(const struct FlexgridIndex *index, size_t *len);

// # Safety
// `dims` must be writable.
enum FlexgridStatus flexgrid_dims(const struct FlexgridIndex *index, size_t *dims);

// Current number of slabs on `axis`.
//
// # Safety
// `slabs` must be writable.
enum FlexgridStatus flexgrid_slab_count(const struct FlexgridIndex *index,
                                        size_t axis,
                                        size_t *slabs);

// Number of split, merge and equalize events so far.
//
// # Safety
// `events` must be writable.
enum FlexgridStatus flexgrid_event_count(const struct FlexgridIndex *index, size_t *events);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEXGRID_H */
