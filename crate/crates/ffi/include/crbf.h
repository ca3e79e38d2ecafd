#ifndef CRBF_H
#define CRBF_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CrbfAlgorithm {
  CRBF_ALGORITHM_BF = 0,
  CRBF_ALGORITHM_WBF = 1,
  CRBF_ALGORITHM_MWBF = 2,
  CRBF_ALGORITHM_IMWBF = 3,
  CRBF_ALGORITHM_SOFT_CRBF = 4,
  CRBF_ALGORITHM_HARD_CRBF = 5,
  CRBF_ALGORITHM_SPA = 6,
  CRBF_ALGORITHM_IDENTITY = 7,
} CrbfAlgorithm;

typedef enum CrbfStatus {
  CRBF_STATUS_OK = 0,
  CRBF_STATUS_NULL_POINTER = 1,
  CRBF_STATUS_INVALID_ARGUMENT = 2,
  CRBF_STATUS_PARSE = 3,
  CRBF_STATUS_LENGTH_MISMATCH = 4,
  CRBF_STATUS_IO = 5,
  CRBF_STATUS_INTERNAL = 6,
} CrbfStatus;

// Opaque decoder bound to one graph.
typedef struct CrbfDecoder CrbfDecoder;

// Opaque parity-check graph.
typedef struct CrbfGraph CrbfGraph;

// Decoder parameters. Fill with [`crbf_decoder_params_default`] and adjust.
// `algorithm` must hold one of the declared enumerators.
typedef struct CrbfDecoderParams {
  enum CrbfAlgorithm algorithm;
  size_t i_max;
  double gamma;
  double imwbf_alpha;
  // Flip every bit tied for the worst metric instead of the lowest index.
  bool flip_all_tied;
  bool pre_check;
  bool literal_init;
} CrbfDecoderParams;

typedef struct CrbfDecodeResult {
  bool converged;
  size_t iterations;
  size_t oscillations;
} CrbfDecodeResult;

typedef struct CrbfPointRecord {
  double ebn0_db;
  uint64_t frames;
  uint64_t bit_errors;
  uint64_t frame_errors;
  double ber;
  double fer;
  double mean_iterations;
} CrbfPointRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *crbf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *crbf_version(void);

// Parses alist text into a new graph.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum CrbfStatus crbf_graph_from_alist(const char *text, struct CrbfGraph **out);

// Reads and parses an alist file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum CrbfStatus crbf_graph_from_alist_file(const char *path, struct CrbfGraph **out);

// Builds a seeded (dv, dc)-regular graph on `n_vars` variables.
//
// # Safety
// `out` must be a valid pointer.
enum CrbfStatus crbf_graph_construct_regular(size_t n_vars,
                                             size_t dv,
                                             size_t dc,
                                             uint64_t seed,
                                             struct CrbfGraph **out);

// Releases a graph. Decoders created from it stay valid. Null is ignored.
//
// # Safety
// `g` must come from this library and not be freed twice.
void crbf_graph_free(struct CrbfGraph *g);

// Number of variable nodes, or 0 for a null graph.
//
// # Safety
// `g` must be null or a live graph.
size_t crbf_graph_n_vars(const struct CrbfGraph *g);

// Number of check nodes, or 0 for a null graph.
//
// # Safety
// `g` must be null or a live graph.
size_t crbf_graph_n_checks(const struct CrbfGraph *g);

// Design rate `1 - M/N` (with redundant rows counted out), or 0 for null.
//
// # Safety
// `g` must be null or a live graph.
double crbf_graph_rate(const struct CrbfGraph *g);

// Serializes the graph as alist text. Release the string with
// [`crbf_string_free`].
//
// # Safety
// `g` must be a live graph and `out` a valid pointer.
enum CrbfStatus crbf_graph_to_alist(const struct CrbfGraph *g, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void crbf_string_free(char *s);

// Writes the binary syndrome of `bits` (length `n_vars`, values 0/1) into
// `out` (length `n_checks`).
//
// # Safety
// Pointers must be valid for the given lengths.
enum CrbfStatus crbf_graph_syndrome(const struct CrbfGraph *g,
                                    const uint8_t *bits,
                                    size_t n_bits,
                                    uint8_t *out,
                                    size_t n_out);

// Fills `out` with the default parameters of `algorithm` on graph `g`.
//
// # Safety
// `g` must be a live graph and `out` a valid pointer.
enum CrbfStatus crbf_decoder_params_default(const struct CrbfGraph *g,
                                            enum CrbfAlgorithm algorithm,
                                            struct CrbfDecoderParams *out);

// Creates a decoder for graph `g`. The decoder keeps its own reference to
// the graph.
//
// # Safety
// `g` must be a live graph; `params` and `out` valid pointers.
enum CrbfStatus crbf_decoder_new(const struct CrbfGraph *g,
                                 const struct CrbfDecoderParams *params,
                                 struct CrbfDecoder **out);

// Releases a decoder. Null is ignored.
//
// # Safety
// `d` must come from this library and not be freed twice.
void crbf_decoder_free(struct CrbfDecoder *d);

// Decodes one received word `y` (length `n_vars`). The decided bits go to
// `out_bits` (length `n_vars`); `result` may be null. `sigma` is the noise
// standard deviation, used only by the sum-product decoder.
//
// # Safety
// Pointers must be valid for the given lengths.
enum CrbfStatus crbf_decode(const struct CrbfDecoder *d,
                            const double *y,
                            size_t n_y,
                            double sigma,
                            uint8_t *out_bits,
                            size_t n_out,
                            struct CrbfDecodeResult *result);

// Noise standard deviation for `ebn0_db` at code rate `rate`.
//
// # Safety
// `out` must be a valid pointer.
enum CrbfStatus crbf_ebn0_to_sigma(double ebn0_db, double rate, double *out);

// Monte Carlo BER/FER at one Eb/N0 with all-zero codewords. Stops after
// `max_frames` or once both error minimums are reached. Results depend only
// on the arguments, not on thread count.
//
// # Safety
// `d` must be a live decoder and `out` a valid pointer.
enum CrbfStatus crbf_run_point(const struct CrbfDecoder *d,
                               double ebn0_db,
                               uint64_t max_frames,
                               uint64_t min_bit_errors,
                               uint64_t min_frame_errors,
                               uint64_t seed,
                               struct CrbfPointRecord *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CRBF_H */
