/* flipscope - numerical toolkit for the Sandstede-model homoclinic-flip
 * study: winding-number sweeps, invariant-manifold families, Floquet
 * analysis of saddle periodic orbits and slice bisection of the
 * homoclinic/heteroclinic bifurcation sequence.
 *
 * C interface: opaque handles plus status codes. All functions returning
 * fs_status leave outputs untouched on failure; fs_last_error() describes
 * the most recent failure on the calling thread.
 */
#ifndef FLIPSCOPE_H
#define FLIPSCOPE_H

#include <stddef.h>

#if defined(_WIN32)
#define FS_API __declspec(dllexport)
#else
#define FS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fs_status {
    FS_OK = 0,
    FS_ERR_INVALID_ARGUMENT,
    FS_ERR_NOT_A_SADDLE,
    FS_ERR_NO_CONVERGENCE,
    FS_ERR_CONVERGED_TO_ORIGIN,
    FS_ERR_NO_SIGN_CHANGE,
    FS_ERR_Q_NOT_FOUND,
    FS_ERR_ODD_CROSSING_COUNT,
    FS_ERR_STEP_SIZE_UNDERFLOW,
    FS_ERR_DIVERGENCE,
    FS_ERR_NO_RETURN,
    FS_ERR_NEWTON_DIVERGED,
    FS_ERR_SECTION_NOT_TRANSVERSE,
    FS_ERR_INSUFFICIENT_RETURNS,
    FS_ERR_CONSTANT_SEQUENCE,
    FS_ERR_COMPLEX_MULTIPLIERS,
    FS_ERR_EIGENSTRUCTURE_MISSING,
    FS_ERR_ORBIT_MISSING,
    FS_ERR_NEVER_NEAR_ORBIT,
    FS_ERR_NO_CLOSE_APPROACH,
    FS_ERR_NOT_ON_HOMOCLINIC_LOCUS,
    FS_ERR_TRUNCATION_TOO_SHORT,
    FS_ERR_NO_BRACKET,
    FS_ERR_DETECTOR_FAILURE,
    FS_ERR_EMPTY_TRACE,
    FS_ERR_STEP_FLOOR_REACHED,
    FS_ERR_IO,
    FS_ERR_UNKNOWN
} fs_status;

FS_API const char* fs_status_name(fs_status status);
FS_API const char* fs_last_error(void);

/* --- model parameters ------------------------------------------------- */

typedef struct fs_params fs_params;

/* reference configuration; alpha and mu start unset and must be assigned */
FS_API fs_params* fs_params_create(void);
FS_API void fs_params_destroy(fs_params* p);
/* keys: a, b, c, alpha, beta, gamma, mu, mu_tilde, delta */
FS_API fs_status fs_params_set(fs_params* p, const char* key, double value);
FS_API fs_status fs_params_get(const fs_params* p, const char* key, double* out);

/* --- vector field ------------------------------------------------------ */

FS_API fs_status fs_eval_field(const fs_params* p, const double state[3], double out[3]);
/* row-major */
FS_API fs_status fs_eval_jacobian(const fs_params* p, const double state[3], double out[9]);
/* values = (lambda_ss, lambda_s, lambda_u); vectors = columns e_ss|e_s|e_u */
FS_API fs_status fs_origin_eigens(const fs_params* p, double values[3], double vectors[9]);
FS_API fs_status fs_classify_case(const fs_params* p, int* resonance, int* case_c,
                                  int* weak_leading);

/* stability: 0 saddle, 1 stable focus, 2 unstable focus, 3 stable node,
 * 4 unstable node, 5 other */
FS_API fs_status fs_find_equilibrium(const fs_params* p, const double guess[3],
                                     int require_secondary, double location[3], int* stability);
FS_API fs_status fs_detect_hopf_at_q(const fs_params* p, double mu_lo, double mu_hi, double tol,
                                     double* mu_star);

/* --- integration -------------------------------------------------------- */

typedef struct fs_trajectory fs_trajectory;

typedef struct fs_integrator_options {
    double rel_tol;        /* default 1e-10 */
    double abs_tol;        /* default 1e-12 */
    double max_step;       /* default 0.25 */
    double t_max;          /* default 5000 */
    int backward;          /* 0 forward, 1 backward */
    double arclength_cap;  /* <= 0 disables the cap */
    double r_escape;       /* default 50 */
} fs_integrator_options;

FS_API void fs_integrator_options_init(fs_integrator_options* opts);
FS_API fs_status fs_integrate(const fs_params* p, const double s0[3],
                              const fs_integrator_options* opts, fs_trajectory** out);
FS_API void fs_trajectory_destroy(fs_trajectory* t);
FS_API fs_status fs_trajectory_final(const fs_trajectory* t, double state[3], double* t_final,
                                     double* arclength);
/* columns t,x,y,z,arclength */
FS_API fs_status fs_trajectory_write_csv(const fs_trajectory* t, const char* path);
/* columns event_id,t,x,y,z,direction */
FS_API fs_status fs_trajectory_events_csv(const fs_trajectory* t, const char* path);

/* --- winding number ------------------------------------------------------ */

/* zeta = -1 encodes SATURATED; termination receives one of
 * reached-boundary / time-limit / crossing-cap / failed */
FS_API fs_status fs_compute_zeta(const fs_params* p, int* zeta, int* crossings,
                                 char* termination, size_t termination_len);
/* raster CSV: alpha,mu,zeta,crossings,termination */
FS_API fs_status fs_sweep_zeta(const fs_params* base, double alpha_min, double alpha_max,
                               double mu_min, double mu_max, int n_alpha, int n_mu, int workers,
                               const char* out_csv);

/* --- periodic orbits ------------------------------------------------------ */

typedef struct fs_orbit fs_orbit;

FS_API fs_status fs_find_primary_orbit(const fs_params* p, int orientable, fs_orbit** out);
FS_API fs_status fs_find_periodic_orbit(const fs_params* p, const double guess[3],
                                        int loop_count, fs_orbit** out);
FS_API void fs_orbit_destroy(fs_orbit* o);
/* multipliers = (Re L1, Im L1, Re L2, Im L2); orientability: 0 orientable,
 * 1 nonorientable, 2 complex */
FS_API fs_status fs_orbit_info(const fs_orbit* o, double fixed_point[3], double* period,
                               double multipliers[4], int* orientability);
/* branch CSV: mu,period,fixed_x,fixed_z,re_L1,im_L1,re_L2,im_L2,orientability */
FS_API fs_status fs_continue_orbit(const fs_params* p, const fs_orbit* o, double mu_target,
                                   const char* branch_csv, double* last_mu, int* hit_fold);
/* return map CSV: x_i,x_ip1; seeds automatically on the chaotic set */
FS_API fs_status fs_returnmap(const fs_params* p, int n, int n_skip, const char* out_csv);
FS_API fs_status fs_collect_returns(const fs_params* p, const double s0[3], int n, int n_skip,
                                    const char* out_csv);

/* --- invariant manifolds --------------------------------------------------- */

typedef struct fs_patch fs_patch;

/* which: stable-2d | unstable-1d | strong-stable-1d (of the origin) */
FS_API fs_status fs_grow_equilibrium_manifold(const fs_params* p, const char* which, double cap,
                                              int n_seeds, fs_patch** out);
/* which: stable | unstable */
FS_API fs_status fs_grow_orbit_manifold(const fs_params* p, const fs_orbit* o, const char* which,
                                        double cap, int n_seeds, fs_patch** out);
FS_API void fs_patch_destroy(fs_patch* patch);
/* long-form CSV: traj_id,t,x,y,z,arclength */
FS_API fs_status fs_patch_write_csv(const fs_patch* patch, const char* path);
/* intersection with the viewing sphere; CSV: curve_id,seq,x,y,z */
FS_API fs_status fs_patch_sphere_csv(const fs_patch* patch, const char* path);
/* first-k crossings of the y = 0 section; CSV: curve_id,seq,x,y,z */
FS_API fs_status fs_patch_section_csv(const fs_patch* patch, const char* path, int max_crossings);

/* --- stereographic projection ----------------------------------------------- */

/* reads curve_id,seq,x,y,z on the viewing sphere; writes curve_id,seq,px,py */
FS_API fs_status fs_project_curves_csv(const char* curveset_csv, const char* out_csv);

/* --- connections and bifurcation location ------------------------------------ */

FS_API fs_status fs_homoclinic_split(const fs_params* p, double* value);
/* detector: split | gap-gamma-o | gap-gamma-t | zeta-change |
 * tangency-gamma-o | tangency-f */
FS_API fs_status fs_locate_bifurcation(const fs_params* p, double mu_lo, double mu_hi,
                                       const char* detector, double tol, double* mu_star);
FS_API fs_status fs_orientation_index(const fs_params* p, double* index);
/* optional one-row bifurcation CSV when out_csv is non-NULL */
FS_API fs_status fs_locate_inclination_flip(const fs_params* p, double alpha_lo, double alpha_hi,
                                            double tol, double* alpha_star, const char* out_csv);
/* bifurcation table CSV: kind,alpha,mu,bracket,loops_gamma_o,loops_gamma_t;
 * report receives a per-point pass/fail summary */
FS_API fs_status fs_run_table_slice(double alpha, int include_tangency, const char* out_csv,
                                    char* report, size_t report_len);

#ifdef __cplusplus
}
#endif

#endif /* FLIPSCOPE_H */
