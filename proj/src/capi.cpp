#include "flipscope.h"

#include <cmath>
#include <cstring>
#include <string>

#include "flip/connections.hpp"
#include "flip/csv.hpp"
#include "flip/error.hpp"
#include "flip/flow.hpp"
#include "flip/manifolds.hpp"
#include "flip/model.hpp"
#include "flip/orbits.hpp"
#include "flip/projection.hpp"
#include "flip/winding.hpp"

using namespace flip;

struct fs_params {
    Params value;
};
struct fs_trajectory {
    Trajectory value;
};
struct fs_orbit {
    Params at;
    PeriodicOrbit value;
};
struct fs_patch {
    ManifoldPatch value;
};

namespace {

thread_local std::string g_last_error;

fs_status map_errc(errc c) {
    switch (c) {
        case errc::invalid_argument: return FS_ERR_INVALID_ARGUMENT;
        case errc::not_a_saddle: return FS_ERR_NOT_A_SADDLE;
        case errc::no_convergence: return FS_ERR_NO_CONVERGENCE;
        case errc::converged_to_origin: return FS_ERR_CONVERGED_TO_ORIGIN;
        case errc::no_sign_change: return FS_ERR_NO_SIGN_CHANGE;
        case errc::q_not_found: return FS_ERR_Q_NOT_FOUND;
        case errc::odd_crossing_count: return FS_ERR_ODD_CROSSING_COUNT;
        case errc::step_size_underflow: return FS_ERR_STEP_SIZE_UNDERFLOW;
        case errc::divergence: return FS_ERR_DIVERGENCE;
        case errc::no_return: return FS_ERR_NO_RETURN;
        case errc::newton_diverged: return FS_ERR_NEWTON_DIVERGED;
        case errc::section_not_transverse: return FS_ERR_SECTION_NOT_TRANSVERSE;
        case errc::insufficient_returns: return FS_ERR_INSUFFICIENT_RETURNS;
        case errc::constant_sequence: return FS_ERR_CONSTANT_SEQUENCE;
        case errc::complex_multipliers: return FS_ERR_COMPLEX_MULTIPLIERS;
        case errc::eigenstructure_missing: return FS_ERR_EIGENSTRUCTURE_MISSING;
        case errc::orbit_missing: return FS_ERR_ORBIT_MISSING;
        case errc::never_near_orbit: return FS_ERR_NEVER_NEAR_ORBIT;
        case errc::no_close_approach: return FS_ERR_NO_CLOSE_APPROACH;
        case errc::not_on_homoclinic_locus: return FS_ERR_NOT_ON_HOMOCLINIC_LOCUS;
        case errc::truncation_too_short: return FS_ERR_TRUNCATION_TOO_SHORT;
        case errc::no_bracket: return FS_ERR_NO_BRACKET;
        case errc::detector_failure: return FS_ERR_DETECTOR_FAILURE;
        case errc::empty_trace: return FS_ERR_EMPTY_TRACE;
        case errc::step_floor_reached: return FS_ERR_STEP_FLOOR_REACHED;
        case errc::io_error: return FS_ERR_IO;
    }
    return FS_ERR_UNKNOWN;
}

template <class Fn>
fs_status guarded(Fn&& fn) {
    try {
        fn();
        return FS_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return map_errc(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FS_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown failure";
        return FS_ERR_UNKNOWN;
    }
}

void copy3(const Vec3& v, double out[3]) {
    out[0] = v.x;
    out[1] = v.y;
    out[2] = v.z;
}

const Params& deref(const fs_params* p) {
    if (!p) throw Error(errc::invalid_argument, "null params handle");
    return p->value;
}

void require_free_parameters(const Params& p) {
    if (std::isnan(p.alpha) || std::isnan(p.mu))
        throw Error(errc::invalid_argument, "alpha and mu must be set before computing");
}

}  // namespace

extern "C" {

const char* fs_status_name(fs_status status) {
    switch (status) {
        case FS_OK: return "ok";
        case FS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
        case FS_ERR_NOT_A_SADDLE: return "NotASaddle";
        case FS_ERR_NO_CONVERGENCE: return "NoConvergence";
        case FS_ERR_CONVERGED_TO_ORIGIN: return "ConvergedToOrigin";
        case FS_ERR_NO_SIGN_CHANGE: return "NoSignChange";
        case FS_ERR_Q_NOT_FOUND: return "QNotFound";
        case FS_ERR_ODD_CROSSING_COUNT: return "OddCrossingCount";
        case FS_ERR_STEP_SIZE_UNDERFLOW: return "StepSizeUnderflow";
        case FS_ERR_DIVERGENCE: return "Divergence";
        case FS_ERR_NO_RETURN: return "NoReturn";
        case FS_ERR_NEWTON_DIVERGED: return "NewtonDiverged";
        case FS_ERR_SECTION_NOT_TRANSVERSE: return "SectionNotTransverse";
        case FS_ERR_INSUFFICIENT_RETURNS: return "InsufficientReturns";
        case FS_ERR_CONSTANT_SEQUENCE: return "ConstantSequence";
        case FS_ERR_COMPLEX_MULTIPLIERS: return "ComplexMultipliers";
        case FS_ERR_EIGENSTRUCTURE_MISSING: return "EigenstructureMissing";
        case FS_ERR_ORBIT_MISSING: return "OrbitMissing";
        case FS_ERR_NEVER_NEAR_ORBIT: return "NeverNearOrbit";
        case FS_ERR_NO_CLOSE_APPROACH: return "NoCloseApproach";
        case FS_ERR_NOT_ON_HOMOCLINIC_LOCUS: return "NotOnHomoclinicLocus";
        case FS_ERR_TRUNCATION_TOO_SHORT: return "TruncationTooShort";
        case FS_ERR_NO_BRACKET: return "NoBracket";
        case FS_ERR_DETECTOR_FAILURE: return "DetectorFailure";
        case FS_ERR_EMPTY_TRACE: return "EmptyTrace";
        case FS_ERR_STEP_FLOOR_REACHED: return "StepFloorReached";
        case FS_ERR_IO: return "IoError";
        case FS_ERR_UNKNOWN: return "UnknownError";
    }
    return "UnknownError";
}

const char* fs_last_error(void) { return g_last_error.c_str(); }

fs_params* fs_params_create(void) {
    auto* p = new fs_params;
    p->value.alpha = std::nan("");
    p->value.mu = std::nan("");
    return p;
}

void fs_params_destroy(fs_params* p) { delete p; }

fs_status fs_params_set(fs_params* p, const char* key, double value) {
    return guarded([&] {
        if (!p || !key) throw Error(errc::invalid_argument, "null argument");
        std::string k = key;
        Params& v = p->value;
        if (k == "a") v.a = value;
        else if (k == "b") v.b = value;
        else if (k == "c") v.c = value;
        else if (k == "alpha") v.alpha = value;
        else if (k == "beta") v.beta = value;
        else if (k == "gamma") v.gamma = value;
        else if (k == "mu") v.mu = value;
        else if (k == "mu_tilde") v.mu_tilde = value;
        else if (k == "delta") v.delta = value;
        else throw Error(errc::invalid_argument, "unknown parameter key: " + k);
        if (!std::isfinite(value)) throw Error(errc::invalid_argument, "non-finite value");
    });
}

fs_status fs_params_get(const fs_params* p, const char* key, double* out) {
    return guarded([&] {
        if (!p || !key || !out) throw Error(errc::invalid_argument, "null argument");
        std::string k = key;
        const Params& v = p->value;
        if (k == "a") *out = v.a;
        else if (k == "b") *out = v.b;
        else if (k == "c") *out = v.c;
        else if (k == "alpha") *out = v.alpha;
        else if (k == "beta") *out = v.beta;
        else if (k == "gamma") *out = v.gamma;
        else if (k == "mu") *out = v.mu;
        else if (k == "mu_tilde") *out = v.mu_tilde;
        else if (k == "delta") *out = v.delta;
        else throw Error(errc::invalid_argument, "unknown parameter key: " + k);
    });
}

fs_status fs_eval_field(const fs_params* p, const double state[3], double out[3]) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        copy3(eval_field(v, {state[0], state[1], state[2]}), out);
    });
}

fs_status fs_eval_jacobian(const fs_params* p, const double state[3], double out[9]) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        Mat3 J = eval_jacobian(v, {state[0], state[1], state[2]});
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out[3 * r + c] = J(r, c);
    });
}

fs_status fs_origin_eigens(const fs_params* p, double values[3], double vectors[9]) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        EigenData e = origin_eigens(v);
        values[0] = e.lambda_ss;
        values[1] = e.lambda_s;
        values[2] = e.lambda_u;
        for (int r = 0; r < 3; ++r) {
            vectors[3 * r + 0] = e.e_ss[r];
            vectors[3 * r + 1] = e.e_s[r];
            vectors[3 * r + 2] = e.e_u[r];
        }
    });
}

fs_status fs_classify_case(const fs_params* p, int* resonance, int* case_c, int* weak_leading) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        CaseReport r = classify_case(v);
        if (resonance) *resonance = r.resonance;
        if (case_c) *case_c = r.case_c;
        if (weak_leading) *weak_leading = r.weak_leading;
    });
}

fs_status fs_find_equilibrium(const fs_params* p, const double guess[3], int require_secondary,
                              double location[3], int* stability) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        Equilibrium eq =
            find_equilibrium(v, {guess[0], guess[1], guess[2]}, require_secondary != 0);
        copy3(eq.location, location);
        if (stability) *stability = int(eq.stability);
    });
}

fs_status fs_detect_hopf_at_q(const fs_params* p, double mu_lo, double mu_hi, double tol,
                              double* mu_star) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        double mu = detect_hopf_at_q(v, mu_lo, mu_hi, tol > 0 ? tol : 1e-8);
        if (mu_star) *mu_star = mu;
    });
}

void fs_integrator_options_init(fs_integrator_options* opts) {
    if (!opts) return;
    opts->rel_tol = 1e-10;
    opts->abs_tol = 1e-12;
    opts->max_step = 0.25;
    opts->t_max = 5000.0;
    opts->backward = 0;
    opts->arclength_cap = 0.0;
    opts->r_escape = 50.0;
}

fs_status fs_integrate(const fs_params* p, const double s0[3], const fs_integrator_options* opts,
                       fs_trajectory** out) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!out) throw Error(errc::invalid_argument, "null output handle");
        IntegratorConfig cfg;
        if (opts) {
            cfg.rel_tol = opts->rel_tol;
            cfg.abs_tol = opts->abs_tol;
            cfg.max_step = opts->max_step;
            cfg.t_max = opts->t_max;
            cfg.direction = opts->backward ? TimeDirection::Backward : TimeDirection::Forward;
            if (opts->arclength_cap > 0.0) cfg.arclength_cap = opts->arclength_cap;
            cfg.r_escape = opts->r_escape;
        }
        Trajectory traj = integrate(v, {s0[0], s0[1], s0[2]}, cfg, {});
        *out = new fs_trajectory{std::move(traj)};
    });
}

void fs_trajectory_destroy(fs_trajectory* t) { delete t; }

fs_status fs_trajectory_final(const fs_trajectory* t, double state[3], double* t_final,
                              double* arclength) {
    return guarded([&] {
        if (!t) throw Error(errc::invalid_argument, "null trajectory handle");
        copy3(t->value.final_state, state);
        if (t_final) *t_final = t->value.t_final;
        if (arclength) *arclength = t->value.arclength;
    });
}

fs_status fs_trajectory_write_csv(const fs_trajectory* t, const char* path) {
    return guarded([&] {
        if (!t || !path) throw Error(errc::invalid_argument, "null argument");
        write_trajectory_csv(path, t->value);
    });
}

fs_status fs_trajectory_events_csv(const fs_trajectory* t, const char* path) {
    return guarded([&] {
        if (!t || !path) throw Error(errc::invalid_argument, "null argument");
        write_events_csv(path, t->value);
    });
}

fs_status fs_compute_zeta(const fs_params* p, int* zeta, int* crossings, char* termination,
                          size_t termination_len) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        WindingResult r = compute_zeta(v);
        if (r.termination == ZetaTermination::Failed)
            throw Error(errc::detector_failure, r.error);
        if (zeta) *zeta = r.saturated ? -1 : r.zeta;
        if (crossings) *crossings = r.crossing_count;
        if (termination && termination_len > 0) {
            std::strncpy(termination, zeta_termination_name(r.termination), termination_len - 1);
            termination[termination_len - 1] = '\0';
        }
    });
}

fs_status fs_sweep_zeta(const fs_params* base, double alpha_min, double alpha_max, double mu_min,
                        double mu_max, int n_alpha, int n_mu, int workers, const char* out_csv) {
    return guarded([&] {
        const Params& v = deref(base);
        if (!out_csv) throw Error(errc::invalid_argument, "null output path");
        SweepSpec spec;
        spec.alpha_min = alpha_min;
        spec.alpha_max = alpha_max;
        spec.mu_min = mu_min;
        spec.mu_max = mu_max;
        spec.n_alpha = n_alpha;
        spec.n_mu = n_mu;
        spec.workers = workers;
        SweepGrid grid = sweep_zeta(v, spec);
        write_sweep_csv(out_csv, grid);
    });
}

fs_status fs_find_primary_orbit(const fs_params* p, int orientable, fs_orbit** out) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!out) throw Error(errc::invalid_argument, "null output handle");
        PeriodicOrbit o = find_primary_orbit(v, orientable != 0);
        *out = new fs_orbit{v, std::move(o)};
    });
}

fs_status fs_find_periodic_orbit(const fs_params* p, const double guess[3], int loop_count,
                                 fs_orbit** out) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!out) throw Error(errc::invalid_argument, "null output handle");
        PeriodicOrbit o = find_periodic_orbit(v, SectionPlane::default_section(),
                                              {guess[0], guess[1], guess[2]}, loop_count);
        *out = new fs_orbit{v, std::move(o)};
    });
}

void fs_orbit_destroy(fs_orbit* o) { delete o; }

fs_status fs_orbit_info(const fs_orbit* o, double fixed_point[3], double* period,
                        double multipliers[4], int* orientability) {
    return guarded([&] {
        if (!o) throw Error(errc::invalid_argument, "null orbit handle");
        copy3(o->value.fixed_point, fixed_point);
        if (period) *period = o->value.period;
        if (multipliers) {
            multipliers[0] = o->value.L1.real();
            multipliers[1] = o->value.L1.imag();
            multipliers[2] = o->value.L2.real();
            multipliers[3] = o->value.L2.imag();
        }
        if (orientability) *orientability = int(o->value.orientability);
    });
}

fs_status fs_continue_orbit(const fs_params* p, const fs_orbit* o, double mu_target,
                            const char* branch_csv, double* last_mu, int* hit_fold) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!o) throw Error(errc::invalid_argument, "null orbit handle");
        ContinuationResult res = continue_orbit(v, o->value, mu_target);
        if (branch_csv) write_branch_csv(branch_csv, res.branch);
        if (last_mu) *last_mu = res.branch.back().first;
        if (hit_fold) *hit_fold = res.hit_fold;
    });
}

fs_status fs_returnmap(const fs_params* p, int n, int n_skip, const char* out_csv) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!out_csv) throw Error(errc::invalid_argument, "null output path");

        // seed on the unstable set of the nonorientable saddle orbit; pick
        // the side whose post-transient returns do not collapse
        PeriodicOrbit gt = find_primary_orbit(v, false);
        Mat3 A = gt.monodromy;
        double lam = gt.L2.real();
        A(0, 0) -= lam;
        A(1, 1) -= lam;
        A(2, 2) -= lam;
        Vec3 cands[3] = {cross(row(A, 0), row(A, 1)), cross(row(A, 0), row(A, 2)),
                         cross(row(A, 1), row(A, 2))};
        Vec3 dirv = cands[0];
        for (int i = 1; i < 3; ++i)
            if (norm(cands[i]) > norm(dirv)) dirv = cands[i];
        dirv = normalized(dirv);

        ReturnMapData data;
        bool ok = false;
        for (double side : {+1.0, -1.0}) {
            try {
                data = collect_returns(v, gt.fixed_point + side * 1e-4 * dirv,
                                       SectionPlane::default_section(), n, n_skip);
                ok = true;
                break;
            } catch (const Error& e) {
                if (e.code() != errc::constant_sequence && e.code() != errc::insufficient_returns)
                    throw;
            }
        }
        if (!ok) throw Error(errc::constant_sequence, "both unstable sides collapse to a point");
        write_returnmap_csv(out_csv, data.pairs);
    });
}

fs_status fs_collect_returns(const fs_params* p, const double s0[3], int n, int n_skip,
                             const char* out_csv) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!out_csv) throw Error(errc::invalid_argument, "null output path");
        ReturnMapData data = collect_returns(v, {s0[0], s0[1], s0[2]},
                                             SectionPlane::default_section(), n, n_skip);
        write_returnmap_csv(out_csv, data.pairs);
    });
}

fs_status fs_grow_equilibrium_manifold(const fs_params* p, const char* which, double cap,
                                       int n_seeds, fs_patch** out) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!which || !out) throw Error(errc::invalid_argument, "null argument");
        std::string w = which;
        ManifoldSelect sel;
        if (w == "stable-2d") sel = ManifoldSelect::Stable2D;
        else if (w == "unstable-1d") sel = ManifoldSelect::Unstable1D;
        else if (w == "strong-stable-1d") sel = ManifoldSelect::StrongStable1D;
        else throw Error(errc::invalid_argument, "unknown manifold selector: " + w);
        Equilibrium origin = find_equilibrium(v, {0, 0, 0});
        origin.eigen = origin_eigens(v);
        ManifoldPatch patch = grow_equilibrium_manifold(v, origin, sel, cap, n_seeds);
        *out = new fs_patch{std::move(patch)};
    });
}

fs_status fs_grow_orbit_manifold(const fs_params* p, const fs_orbit* o, const char* which,
                                 double cap, int n_seeds, fs_patch** out) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        if (!o || !which || !out) throw Error(errc::invalid_argument, "null argument");
        std::string w = which;
        OrbitManifoldSelect sel;
        if (w == "stable") sel = OrbitManifoldSelect::Stable;
        else if (w == "unstable") sel = OrbitManifoldSelect::Unstable;
        else throw Error(errc::invalid_argument, "unknown orbit manifold selector: " + w);
        ManifoldPatch patch = grow_orbit_manifold(v, o->value, sel, cap, n_seeds);
        *out = new fs_patch{std::move(patch)};
    });
}

void fs_patch_destroy(fs_patch* patch) { delete patch; }

fs_status fs_patch_write_csv(const fs_patch* patch, const char* path) {
    return guarded([&] {
        if (!patch || !path) throw Error(errc::invalid_argument, "null argument");
        write_patch_csv(path, patch->value);
    });
}

fs_status fs_patch_sphere_csv(const fs_patch* patch, const char* path) {
    return guarded([&] {
        if (!patch || !path) throw Error(errc::invalid_argument, "null argument");
        write_curveset_csv(path, intersect_with_sphere(patch->value));
    });
}

fs_status fs_patch_section_csv(const fs_patch* patch, const char* path, int max_crossings) {
    return guarded([&] {
        if (!patch || !path) throw Error(errc::invalid_argument, "null argument");
        write_curveset_csv(path,
                           section_trace(patch->value, SectionPlane::default_section(),
                                         max_crossings > 0 ? max_crossings : 3));
    });
}

fs_status fs_project_curves_csv(const char* curveset_csv, const char* out_csv) {
    return guarded([&] {
        if (!curveset_csv || !out_csv) throw Error(errc::invalid_argument, "null argument");
        CurveSet cs = read_curveset_csv(curveset_csv);
        write_projected_csv(out_csv, project_set(cs));
    });
}

fs_status fs_homoclinic_split(const fs_params* p, double* value) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        GapMeasurement gap = homoclinic_split(v);
        if (value) *value = gap.value;
    });
}

fs_status fs_locate_bifurcation(const fs_params* p, double mu_lo, double mu_hi,
                                const char* detector, double tol, double* mu_star) {
    return guarded([&] {
        const Params& v = deref(p);
        if (std::isnan(v.alpha)) throw Error(errc::invalid_argument, "alpha must be set");
        if (!detector) throw Error(errc::invalid_argument, "null detector name");
        std::string d = detector;
        Detector det;
        if (d == "split") det = Detector::Split;
        else if (d == "gap-gamma-o") det = Detector::GapGammaO;
        else if (d == "gap-gamma-t") det = Detector::GapGammaT;
        else if (d == "zeta-change") det = Detector::ZetaChange;
        else if (d == "tangency-gamma-o") det = Detector::TangencyGammaO;
        else if (d == "tangency-f") det = Detector::TangencyF;
        else throw Error(errc::invalid_argument, "unknown detector: " + d);
        BifurcationPoint pt =
            locate_bifurcation(v, mu_lo, mu_hi, det, d, tol > 0 ? tol : 1e-8);
        if (mu_star) *mu_star = pt.mu;
    });
}

fs_status fs_orientation_index(const fs_params* p, double* index) {
    return guarded([&] {
        const Params& v = deref(p);
        require_free_parameters(v);
        double idx = orientation_index(v);
        if (index) *index = idx;
    });
}

fs_status fs_locate_inclination_flip(const fs_params* p, double alpha_lo, double alpha_hi,
                                     double tol, double* alpha_star, const char* out_csv) {
    return guarded([&] {
        const Params& v = deref(p);
        BifurcationPoint pt =
            locate_inclination_flip(v, alpha_lo, alpha_hi, tol > 0 ? tol : 1e-6);
        if (alpha_star) *alpha_star = pt.alpha;
        if (out_csv) write_bifurcations_csv(out_csv, {pt});
    });
}

fs_status fs_run_table_slice(double alpha, int include_tangency, const char* out_csv,
                             char* report, size_t report_len) {
    return guarded([&] {
        SliceOutcome outcome = run_table_slice(alpha, include_tangency != 0);
        if (out_csv) write_bifurcations_csv(out_csv, outcome.points);
        if (report && report_len > 0) {
            std::string text;
            for (const BifurcationPoint& pt : outcome.points)
                text += pt.kind + " mu=" + format_double(pt.mu) + "\n";
            for (const std::string& f : outcome.failures) text += "FAILED " + f + "\n";
            std::strncpy(report, text.c_str(), report_len - 1);
            report[report_len - 1] = '\0';
        }
    });
}

}  // extern "C"
