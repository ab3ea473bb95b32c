#ifndef CONFORMAL_SPECTRA_CAPI_H
#define CONFORMAL_SPECTRA_CAPI_H

/* C interface to the conformal spectra library. Every call returns a cs_status;
   on failure cs_last_error() holds a message for the calling thread. Strings
   returned through char** are owned by the caller and released with
   cs_string_free. Sweeps that fail on some rows still hand back the partial
   table, with the failing rows marked in its error column. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CS_API __declspec(dllexport)
#else
#define CS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
    CS_OK = 0,
    CS_ERR_INVALID_ARGUMENT = 1,
    CS_ERR_PARSE = 2,
    CS_ERR_SOLVER = 3,
    CS_ERR_IO = 4,
    CS_ERR_INTERNAL = 5
} cs_status;

typedef struct cs_complex cs_complex;
typedef struct cs_profile cs_profile;

CS_API const char* cs_version(void);
CS_API const char* cs_last_error(void);
CS_API void cs_string_free(char* s);

/* Complexes: `path:8`, `cycle:8:2`, `halfopen:5`, `simplex:3`, `file:PATH`, products with 'x'.
   ambient_dim <= 0 keeps the top cell dimension. */
CS_API cs_status cs_complex_create(const char* spec, int ambient_dim, cs_complex** out);
CS_API void cs_complex_free(cs_complex* c);
CS_API cs_status cs_complex_dimension(const cs_complex* c, int* dim);
CS_API cs_status cs_complex_cell_count(const cs_complex* c, int k, size_t* count);
CS_API cs_status cs_complex_node_count(const cs_complex* c, size_t* count);
/* Writes up to `capacity` Betti numbers; *count receives dimension + 1. */
CS_API cs_status cs_complex_betti(const cs_complex* c, int* betti, size_t capacity, size_t* count);

CS_API cs_status cs_profile_constant(const cs_complex* c, double value, cs_profile** out);
CS_API cs_status cs_profile_from_samples(const double* samples, size_t count, cs_profile** out);
/* Independent log-normal node samples exp(sigma g), seeded. */
CS_API cs_status cs_profile_random(const cs_complex* c, double sigma, uint64_t seed, cs_profile** out);
CS_API void cs_profile_free(cs_profile* h);
CS_API cs_status cs_conformal_volume(const cs_complex* c, const cs_profile* h, double* volume);

/* CSV `degree,index,kind,value,residual`, first m values per degree. */
CS_API cs_status cs_spectrum_csv(const cs_complex* c, const cs_profile* h, const int* degrees, size_t ndegrees, int m,
                                 double tol, char** csv);
/* First m nonzero coexact values of degree p into values[0..m); missing ones are NaN. */
CS_API cs_status cs_coexact_values(const cs_complex* c, const cs_profile* h, int p, int m, double* values,
                                   int* harmonic_dim);

typedef struct cs_pinch_options {
    int n;
    int p;
    double R;
    int resolution;
    double volume;
    int coarse_check; /* nonzero: add the coarse complex columns (n = 5, p = 1) */
    int threads;
} cs_pinch_options;

CS_API cs_pinch_options cs_pinch_defaults(void);
CS_API cs_status cs_pinch_sweep_csv(const cs_pinch_options* opts, const double* etas, size_t count, char** csv);
/* Slope over the last three decades of the sweep, with the bound check. */
CS_API cs_status cs_pinch_slope(const cs_pinch_options* opts, const double* etas, size_t count, double* slope,
                                int* bound_violations);

/* operator: "pinch" or "cylinder" (the pinch profile on [0, 1]). CSV `index,value,residual`. */
CS_API cs_status cs_radial_csv(const char* op, int n, int p, double eta, int resolution, int m, char** csv);

/* Cover data ({"mu": ...}) and/or a two-domain {"glue": {...}} block. */
CS_API cs_status cs_mcgowan_json(const char* config_json, double a, double b, char** json);
/* Built-in split-product corpus: CSV `label,degree,mu_true,glue_bound,sound,k_q,mcgowan_bound,mu_kq_true`. */
CS_API cs_status cs_cover_corpus_csv(uint64_t seed, char** csv, int* unsound);

typedef struct cs_dodziuk_options {
    double tau;
    int n;
    int trials;
    uint64_t seed;
    int threads;
} cs_dodziuk_options;

CS_API cs_dodziuk_options cs_dodziuk_defaults(void);
/* CSV `trial,complex,compared,min_ratio,max_ratio,lo,hi,inside`. */
CS_API cs_status cs_dodziuk_csv(const cs_dodziuk_options* opts, char** csv, int* violations);

typedef struct cs_handle_options {
    double length;
    int resolution;
    int left_vertex;
    int right_vertex;
    int ambient_dim; /* <= 0: keep the complexes' own */
    int m;
    int threads;
} cs_handle_options;

CS_API cs_handle_options cs_handle_defaults(void);
/* Constant unit profiles on both sides. */
CS_API cs_status cs_handle_sweep_csv(const char* left_spec, const char* right_spec, const cs_handle_options* opts,
                                     const double* eps_list, size_t count, char** csv, double* final_deviation,
                                     double* first_deviation);

/* targets JSON {n, N, nu, V0, delta}; eps_list may be NULL for the default schedule. */
CS_API cs_status cs_prescribe_json(const char* targets_json, double tol, const double* eps_list, size_t count,
                                   int max_evaluations, int threads, char** json, int* converged);

#ifdef __cplusplus
}
#endif

#endif
