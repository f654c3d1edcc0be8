/* C interface to the discrete de Rham library.
 *
 * Objects are opaque handles created by ddr_*_create / ddr_mesh_* functions
 * and released with the matching *_free. Every fallible call returns a
 * ddr_status; on failure ddr_last_error() gives a message for the calling
 * thread. Output pointers are only written on success.
 */
#ifndef DDR_C_H
#define DDR_C_H

#include <stddef.h>

#if defined(_WIN32)
#define DDR_API __declspec(dllexport)
#else
#define DDR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ddr_status {
    DDR_OK = 0,
    DDR_ERR_ARGUMENT = 1, /* null pointer, out-of-range value, unknown name */
    DDR_ERR_IO = 2,       /* file could not be read or written */
    DDR_ERR_INVALID = 3,  /* data rejected: malformed mesh, precondition failed */
    DDR_ERR_NUMERIC = 4,  /* factorization or solver breakdown */
    DDR_ERR_INTERNAL = 5
} ddr_status;

typedef enum ddr_manifold { DDR_MANIFOLD_CUSTOM = 0, DDR_MANIFOLD_SPHERE = 1, DDR_MANIFOLD_TORUS = 2 } ddr_manifold;

typedef enum ddr_scheme { DDR_CRANK_NICOLSON = 0, DDR_IMPLICIT_EULER = 1 } ddr_scheme;

/* current as the functional v -> sum_f int <J, P v> (default) or as M1 I^1 J */
typedef enum ddr_source { DDR_SOURCE_LOAD = 0, DDR_SOURCE_INTERPOLATE = 1 } ddr_source;

typedef struct ddr_mesh ddr_mesh;
typedef struct ddr_complex ddr_complex;
typedef struct ddr_run ddr_run;

DDR_API const char* ddr_version(void);
DDR_API const char* ddr_last_error(void);
DDR_API const char* ddr_status_string(ddr_status s);
/* n > 0 caps worker threads; 0 falls back to DDR_THREADS / hardware */
DDR_API void ddr_set_threads(int n);

/* ---- meshes ---- */

typedef struct ddr_mesh_info {
    int manifold; /* ddr_manifold */
    long vertices, edges, faces, euler;
    /* 2-cells by kind: curved boundary-layer cells and flat polygons by vertex count */
    int boundary_cells, triangles, quads, pentagons, other_cells;
    double h_max;  /* max over 2-cells of area^(1/2) */
    double h_mean; /* (total area / #2-cells)^(1/2) */
} ddr_mesh_info;

typedef struct ddr_validation {
    int ok;
    double affine_residual, map_mismatch, composition_residual, min_det, max_size_ratio;
    long euler;
    int problem_count;
    char first_problem[256];
} ddr_validation;

DDR_API ddr_status ddr_mesh_torus(int n, ddr_mesh** out);
DDR_API ddr_status ddr_mesh_sphere(double rs, ddr_mesh** out);
DDR_API ddr_status ddr_mesh_load(const char* path, ddr_mesh** out);
DDR_API ddr_status ddr_mesh_save(const ddr_mesh* m, const char* path);
DDR_API void ddr_mesh_free(ddr_mesh* m);
DDR_API ddr_status ddr_mesh_get_info(const ddr_mesh* m, ddr_mesh_info* out);
DDR_API ddr_status ddr_mesh_validate(const ddr_mesh* m, double tol, ddr_validation* out);
/* default sphere refinement parameters r_s, coarsest first; out holds `levels` values */
DDR_API ddr_status ddr_sphere_sequence(int levels, double* out);

/* ---- discrete complex ---- */

typedef struct ddr_complex_checks {
    double dd, projection, link, stokes; /* relative residuals */
} ddr_complex_checks;

typedef struct ddr_commutation {
    double residual[2];      /* k = 0, 1 at the default quadrature */
    double residual_fine[2]; /* with 4 extra quadrature degrees */
    int ok[2];               /* residual <= 10 |residual - residual_fine| + 1e-12 */
} ddr_commutation;

typedef struct ddr_betti {
    int betti[3];
    int rank[2];
    double gap;
    int gap_ok;
} ddr_betti;

/* quad_degree < 0 selects the default 2r + 6 */
DDR_API ddr_status ddr_complex_create(const ddr_mesh* m, int r, int quad_degree, ddr_complex** out);
DDR_API void ddr_complex_free(ddr_complex* c);
DDR_API ddr_status ddr_complex_ndofs(const ddr_complex* c, int k, int* out);
DDR_API ddr_status ddr_complex_check(const ddr_complex* c, unsigned seed, ddr_complex_checks* out);
DDR_API ddr_status ddr_complex_commutation(const ddr_complex* c, ddr_commutation* out);
DDR_API ddr_status ddr_complex_betti(const ddr_complex* c, ddr_betti* out);
/* || P^1 I^1 E(t) - E(t) || for the electric field of an exact case */
DDR_API ddr_status ddr_complex_potential_error(const ddr_complex* c, const char* case_name, double t, double* out);
/* writes D0, D1, M0, M1, M2 as Matrix Market files into an existing directory */
DDR_API ddr_status ddr_complex_export(const ddr_complex* c, const char* dir);

/* ---- exact solutions ---- */

DDR_API int ddr_case_count(void);
DDR_API const char* ddr_case_name(int i);
/* 1 for sphere cases, 2 for torus cases, 0 if unknown */
DDR_API int ddr_case_manifold(const char* name);
/* finite-difference residuals {faraday, ampere, gauss} at a chart point */
DDR_API ddr_status ddr_case_residuals(const char* name, int chart, double x, double y, double t, double out[3]);

/* ---- Maxwell ---- */

typedef struct ddr_run_config {
    double dt;
    double tmax;
    int scheme;       /* ddr_scheme */
    int series_every; /* keep energy/constraint every n steps; 0: none */
    int source;       /* ddr_source */
} ddr_run_config;

typedef struct ddr_run_report {
    double h;
    int ndof;
    int steps;
    double dt; /* effective step tmax / steps */
    double err_E, err_dE, err_B;
    double energy0, energy_min, energy_max, energy_drift;
    double constraint_max;
} ddr_run_report;

DDR_API void ddr_run_config_default(ddr_run_config* cfg);
DDR_API ddr_status ddr_run_case(const ddr_complex* c, const char* case_name, const ddr_run_config* cfg, ddr_run** out);
DDR_API void ddr_run_free(ddr_run* r);
DDR_API ddr_status ddr_run_get_report(const ddr_run* r, ddr_run_report* out);
/* pointers stay valid until ddr_run_free */
DDR_API ddr_status ddr_run_series(const ddr_run* r, size_t* n, const double** t, const double** energy,
    const double** constraint);

/* ---- rates ---- */

/* least-squares slope of log e vs log h; NaN if fewer than two usable points */
DDR_API double ddr_fit_rate(const double* h, const double* e, size_t n);

#ifdef __cplusplus
}
#endif

#endif
