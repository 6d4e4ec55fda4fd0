#ifndef D3NET_H
#define D3NET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum D3Primitive {
  D3_PRIMITIVE_BROADCAST = 0,
  D3_PRIMITIVE_ONE_TO_ALL = 1,
  D3_PRIMITIVE_ALL_TO_ONE = 2,
  D3_PRIMITIVE_ALL_TO_ALL = 3,
  D3_PRIMITIVE_PERMUTATION = 4,
} D3Primitive;

typedef enum D3Status {
  D3_STATUS_OK = 0,
  D3_STATUS_NULL_POINTER = 1,
  D3_STATUS_INVALID_ARGUMENT = 2,
  D3_STATUS_PRECONDITION = 3,
  D3_STATUS_BUFFER_TOO_SMALL = 4,
  D3_STATUS_SIMULATION = 5,
  D3_STATUS_INTERNAL = 6,
} D3Status;

// Opaque simulation result handle.
typedef struct D3Metrics D3Metrics;

// Opaque network handle.
typedef struct D3Network D3Network;

typedef struct D3Addr {
  uint32_t c;
  uint32_t d;
  uint32_t p;
} D3Addr;

// Unicast source-vector header.
typedef struct D3Header {
  uint8_t b;
  uint32_t gamma;
  uint32_t pi;
  uint32_t delta;
} D3Header;

typedef struct D3SimOptions {
  enum D3Primitive primitive;
  // Root of broadcast and one-to-all, sink of all-to-one.
  struct D3Addr root;
  // Number of broadcasts.
  uint32_t count;
  uint64_t seed;
  // Seed of the random permutation.
  uint64_t perm_seed;
  // Nonzero: queued mode. Permutations always run queued.
  uint8_t queued;
  // Nonzero: FIFO instead of LIFO in queued mode.
  uint8_t fifo;
  uint8_t paper_exact;
  uint8_t no_delays;
} D3SimOptions;

typedef struct D3Summary {
  uint64_t rounds;
  uint64_t delays;
  uint32_t total_steps;
  uint64_t total_hops;
  uint64_t conflicts;
  uint64_t deliveries;
  // 1 when deliveries match the primitive's expected set exactly.
  uint8_t delivered_ok;
} D3Summary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// call into the library from the same thread; never null.
const char *d3_last_error(void);

enum D3Status d3_network_new(uint32_t k, uint32_t m, struct D3Network **out);

void d3_network_free(struct D3Network *net);

// `K * M * M`, or 0 for a null handle.
uintptr_t d3_network_router_count(const struct D3Network *net);

// Writes the distinct neighbours of `addr` into `buf`. `len` receives the
// neighbour count even when the buffer is too small.
enum D3Status d3_neighbors(const struct D3Network *net,
                           struct D3Addr addr,
                           struct D3Addr *buf,
                           uintptr_t cap,
                           uintptr_t *len);

enum D3Status d3_bfs_distance(const struct D3Network *net,
                              struct D3Addr src,
                              struct D3Addr dst,
                              uint32_t *out);

enum D3Status d3_diameter(const struct D3Network *net, uint32_t *out);

// Minimal three-hop header from `src` to `dst`.
enum D3Status d3_header_for(const struct D3Network *net,
                            struct D3Addr src,
                            struct D3Addr dst,
                            struct D3Header *out);

// Router where a unicast header launched at `src` arrives.
enum D3Status d3_route_end(const struct D3Network *net,
                           struct D3Addr src,
                           struct D3Header header,
                           struct D3Addr *out);

// Builds and runs one primitive. A strict-mode run with conflicts still
// succeeds; inspect the summary.
enum D3Status d3_simulate(const struct D3Network *net,
                          const struct D3SimOptions *options,
                          struct D3Metrics **out);

enum D3Status d3_metrics_summary(const struct D3Metrics *metrics, struct D3Summary *out);

// Full metrics as a JSON string; release it with [`d3_string_free`].
enum D3Status d3_metrics_json(const struct D3Metrics *metrics, char **out);

void d3_metrics_free(struct D3Metrics *metrics);

void d3_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* D3NET_H */
