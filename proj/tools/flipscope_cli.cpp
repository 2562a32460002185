// flipscope command-line front end. Links only the C API.
//
// Configuration precedence: command-line flags > FLIPSCOPE_* environment
// variables > config file (flat key = value) > built-in defaults. alpha and
// mu carry no defaults and must be supplied for every computing subcommand.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flipscope.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitConfig = 2;

struct ParamsGuard {
    fs_params* p = nullptr;
    ParamsGuard() : p(fs_params_create()) {}
    ~ParamsGuard() { fs_params_destroy(p); }
    ParamsGuard(const ParamsGuard&) = delete;
    ParamsGuard& operator=(const ParamsGuard&) = delete;
};

int fail_domain(const std::string& op, fs_status st) {
    std::fprintf(stderr, "error: %s failed: %s (%s)\n", op.c_str(), fs_status_name(st),
                 fs_last_error());
    return kExitDomain;
}

// flat key = value file; '#' starts a comment
std::map<std::string, std::string> read_config_file(const std::string& path, bool& ok) {
    std::map<std::string, std::string> out;
    ok = true;
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config file %s\n", path.c_str());
        ok = false;
        return out;
    }
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(s.begin());
            while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::fprintf(stderr, "error: malformed config line: %s\n", line.c_str());
            ok = false;
            return out;
        }
        out[key] = value;
    }
    return out;
}

// merged option lookup: flag > env (FLIPSCOPE_KEY) > config file
class Config {
public:
    Config(const std::map<std::string, std::string>& file) : file_(file) {}

    std::optional<std::string> lookup(const std::string& key) const {
        std::string env_key = "FLIPSCOPE_";
        for (char c : key) env_key += char(c == '-' ? '_' : std::toupper((unsigned char)c));
        if (const char* env = std::getenv(env_key.c_str())) return std::string(env);
        auto it = file_.find(key);
        if (it != file_.end()) return it->second;
        return std::nullopt;
    }

    bool fill(const std::string& key, std::optional<double>& slot) const {
        if (slot) return true;  // flag already set
        auto v = lookup(key);
        if (!v) return true;
        try {
            slot = std::stod(*v);
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: bad numeric value for %s: %s\n", key.c_str(),
                         v->c_str());
            return false;
        }
        return true;
    }

private:
    std::map<std::string, std::string> file_;
};

struct CommonOpts {
    std::optional<double> alpha, mu;
    std::string config_path;
    int workers = 1;
};

bool apply_model_params(const ParamsGuard& g, const Config& cfg, const CommonOpts& common,
                        bool need_mu = true) {
    for (const char* key : {"a", "b", "c", "beta", "gamma", "mu_tilde", "delta"}) {
        auto v = cfg.lookup(key);
        if (v) {
            try {
                if (fs_params_set(g.p, key, std::stod(*v)) != FS_OK) return false;
            } catch (const std::exception&) {
                std::fprintf(stderr, "error: bad value for %s\n", key);
                return false;
            }
        }
    }
    if (!common.alpha) {
        std::fprintf(stderr, "error: --alpha is required\n");
        return false;
    }
    fs_params_set(g.p, "alpha", *common.alpha);
    if (need_mu) {
        if (!common.mu) {
            std::fprintf(stderr, "error: --mu is required\n");
            return false;
        }
        fs_params_set(g.p, "mu", *common.mu);
    } else if (common.mu) {
        fs_params_set(g.p, "mu", *common.mu);
    } else {
        fs_params_set(g.p, "mu", 0.0);
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flipscope: winding sweeps, orbits, manifolds and bifurcation slices for the "
                 "Sandstede flip model"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "flat key = value config file");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "winding-number raster over an (alpha, mu) window");
    double sw_amin = 0, sw_amax = 0, sw_mmin = 0, sw_mmax = 0;
    int sw_na = 0, sw_nmu = 0;
    std::string sw_out = "sweep.csv";
    sweep->add_option("--alpha-min", sw_amin)->required();
    sweep->add_option("--alpha-max", sw_amax)->required();
    sweep->add_option("--mu-min", sw_mmin)->required();
    sweep->add_option("--mu-max", sw_mmax)->required();
    sweep->add_option("--n-alpha", sw_na)->required();
    sweep->add_option("--n-mu", sw_nmu)->required();
    sweep->add_option("--workers", common.workers, "worker thread count");
    sweep->add_option("--out", sw_out, "output raster CSV");

    // slice
    auto* slice = app.add_subcommand("slice", "bifurcation sequence along a fixed-alpha slice");
    double sl_alpha = 0.5;
    double sl_mu_min = 0, sl_mu_max = 0;
    bool sl_have_window = false;
    std::string sl_detector;
    std::string sl_out = "slice.csv";
    bool sl_stretch = false;
    slice->add_option("--alpha", sl_alpha)->required();
    auto* sl_min_opt = slice->add_option("--mu-min", sl_mu_min, "bracket start (single detector)");
    slice->add_option("--mu-max", sl_mu_max, "bracket end (single detector)")->needs(sl_min_opt);
    slice->add_option("--detectors", sl_detector,
                      "single detector to bisect (split | gap-gamma-o | gap-gamma-t | "
                      "zeta-change | tangency-gamma-o | tangency-f); omit for the full sequence");
    slice->add_flag("--stretch", sl_stretch, "include the tangency targets in the full sequence");
    slice->add_option("--out", sl_out, "output bifurcation CSV");

    // orbit
    auto* orbit = app.add_subcommand("orbit", "locate a primary periodic orbit, optionally continue it");
    std::string orb_which = "gamma-o";
    std::optional<double> orb_continue_to;
    std::string orb_out = "branch.csv";
    orbit->add_option("--alpha", common.alpha)->required();
    orbit->add_option("--mu", common.mu)->required();
    orbit->add_option("--which", orb_which, "gamma-o | gamma-t");
    orbit->add_option("--continue-to", orb_continue_to, "continue the orbit to this mu");
    orbit->add_option("--out", orb_out, "branch CSV (with --continue-to)");

    // manifold
    auto* manifold = app.add_subcommand("manifold", "grow an invariant-manifold trajectory family");
    std::string mf_which = "stable-2d";
    double mf_cap = 4.0;
    int mf_seeds = 200;
    std::string mf_out = "patch.csv";
    std::string mf_sphere_out, mf_section_out;
    manifold->add_option("--alpha", common.alpha)->required();
    manifold->add_option("--mu", common.mu)->required();
    manifold->add_option("--which", mf_which,
                         "stable-2d | unstable-1d | strong-stable-1d | orbit-stable | orbit-unstable");
    manifold->add_option("--cap", mf_cap, "arclength cap per trajectory");
    manifold->add_option("--seeds", mf_seeds, "number of seed trajectories");
    manifold->add_option("--out", mf_out, "patch CSV");
    manifold->add_option("--sphere-out", mf_sphere_out, "viewing-sphere intersection CSV");
    manifold->add_option("--section-out", mf_section_out, "y = 0 section trace CSV");

    // connect
    auto* connect = app.add_subcommand("connect", "split/gap diagnostics and slice bisection");
    std::string cn_detector = "split";
    std::optional<double> cn_mu_lo, cn_mu_hi;
    double cn_tol = 1e-8;
    connect->add_option("--alpha", common.alpha)->required();
    connect->add_option("--mu", common.mu, "evaluation point (diagnostic mode)");
    connect->add_option("--detector", cn_detector,
                        "split | gap-gamma-o | gap-gamma-t | zeta-change");
    connect->add_option("--mu-lo", cn_mu_lo, "bisection bracket start");
    connect->add_option("--mu-hi", cn_mu_hi, "bisection bracket end");
    connect->add_option("--tol", cn_tol, "bisection tolerance");

    // flip
    auto* flip_cmd = app.add_subcommand("flip", "locate the inclination flip on the mu = 0 locus");
    double fl_amin = 0.2, fl_amax = 0.5;
    double fl_tol = 1e-6;
    std::string fl_out = "flip.csv";
    flip_cmd->add_option("--alpha-min", fl_amin)->required();
    flip_cmd->add_option("--alpha-max", fl_amax)->required();
    flip_cmd->add_option("--tol", fl_tol);
    flip_cmd->add_option("--out", fl_out, "one-row bifurcation CSV");

    // project
    auto* project = app.add_subcommand("project", "stereographic projection of sphere curves");
    std::string pj_in, pj_out = "projected.csv";
    project->add_option("--in", pj_in, "curve-set CSV (curve_id,seq,x,y,z)")->required();
    project->add_option("--out", pj_out, "projected CSV");

    // returnmap
    auto* returnmap = app.add_subcommand("returnmap", "successive section returns on the attractor");
    int rm_n = 300, rm_skip = 200;
    std::string rm_out = "returnmap.csv";
    returnmap->add_option("--alpha", common.alpha)->required();
    returnmap->add_option("--mu", common.mu)->required();
    returnmap->add_option("--n", rm_n, "number of recorded returns");
    returnmap->add_option("--skip", rm_skip, "transient returns to discard");
    returnmap->add_option("--out", rm_out, "return-map CSV");

    // shared --alpha/--mu on subcommands that use the full parameter set
    sweep->add_option("--alpha", common.alpha, "unused for sweep (ranges rule)");
    sweep->add_option("--mu", common.mu, "unused for sweep (ranges rule)");
    connect->add_option("--workers", common.workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    bool cfg_ok = true;
    Config cfg(read_config_file(common.config_path, cfg_ok));
    if (!cfg_ok) return kExitConfig;
    if (!common.alpha && cfg.lookup("alpha")) common.alpha = std::stod(*cfg.lookup("alpha"));
    if (!common.mu && cfg.lookup("mu")) common.mu = std::stod(*cfg.lookup("mu"));
    if (auto w = cfg.lookup("workers"); w && common.workers == 1) common.workers = std::stoi(*w);

    if (sweep->parsed()) {
        if (sw_amin > sw_amax || sw_mmin > sw_mmax) {
            std::fprintf(stderr, "error: inverted sweep range\n");
            return kExitConfig;
        }
        if (sw_na < 1 || sw_nmu < 1) {
            std::fprintf(stderr, "error: grid must be at least 1x1\n");
            return kExitConfig;
        }
        ParamsGuard g;
        CommonOpts tmp = common;
        tmp.alpha = 0.0;
        tmp.mu = 0.0;
        if (!apply_model_params(g, cfg, tmp)) return kExitConfig;
        fs_status st = fs_sweep_zeta(g.p, sw_amin, sw_amax, sw_mmin, sw_mmax, sw_na, sw_nmu,
                                     common.workers, sw_out.c_str());
        if (st != FS_OK) return fail_domain("sweep", st);
        std::printf("wrote %s (%dx%d cells)\n", sw_out.c_str(), sw_na, sw_nmu);
        return kExitOk;
    }

    if (slice->parsed()) {
        if (!sl_detector.empty()) {
            if (slice->count("--mu-min") == 0 || slice->count("--mu-max") == 0) {
                std::fprintf(stderr, "error: --mu-min/--mu-max required with --detectors\n");
                return kExitConfig;
            }
            if (sl_mu_min >= sl_mu_max) {
                std::fprintf(stderr, "error: inverted bracket\n");
                return kExitConfig;
            }
            ParamsGuard g;
            CommonOpts tmp = common;
            tmp.alpha = sl_alpha;
            tmp.mu = 0.0;
            if (!apply_model_params(g, cfg, tmp)) return kExitConfig;
            double mu_star = 0.0;
            fs_status st = fs_locate_bifurcation(g.p, sl_mu_min, sl_mu_max, sl_detector.c_str(),
                                                 0.0, &mu_star);
            if (st != FS_OK) return fail_domain("slice", st);
            std::printf("%s located at mu = %.10e\n", sl_detector.c_str(), mu_star);
            return kExitOk;
        }
        std::vector<char> report(8192);
        fs_status st = fs_run_table_slice(sl_alpha, sl_stretch ? 1 : 0, sl_out.c_str(),
                                          report.data(), report.size());
        if (st != FS_OK) return fail_domain("slice", st);
        std::printf("%s", report.data());
        std::printf("wrote %s\n", sl_out.c_str());
        (void)sl_have_window;
        return kExitOk;
    }

    if (orbit->parsed()) {
        ParamsGuard g;
        if (!apply_model_params(g, cfg, common)) return kExitConfig;
        bool orientable = orb_which == "gamma-o";
        if (!orientable && orb_which != "gamma-t") {
            std::fprintf(stderr, "error: --which must be gamma-o or gamma-t\n");
            return kExitConfig;
        }
        fs_orbit* o = nullptr;
        fs_status st = fs_find_primary_orbit(g.p, orientable ? 1 : 0, &o);
        if (st != FS_OK) return fail_domain("orbit", st);
        double fp[3], period, mult[4];
        int orient = 0;
        fs_orbit_info(o, fp, &period, mult, &orient);
        std::printf("%s: fixed point (%.12g, %.12g, %.12g), period %.12g\n", orb_which.c_str(),
                    fp[0], fp[1], fp[2], period);
        std::printf("multipliers: %.12g%+.12gi, %.12g%+.12gi (%s)\n", mult[0], mult[1], mult[2],
                    mult[3],
                    orient == 0 ? "orientable" : (orient == 1 ? "nonorientable" : "complex"));
        if (orb_continue_to) {
            double last_mu = 0.0;
            int hit_fold = 0;
            st = fs_continue_orbit(g.p, o, *orb_continue_to, orb_out.c_str(), &last_mu, &hit_fold);
            if (st != FS_OK) {
                fs_orbit_destroy(o);
                return fail_domain("orbit continuation", st);
            }
            std::printf("continued to mu = %.10e%s; wrote %s\n", last_mu,
                        hit_fold ? " (fold)" : "", orb_out.c_str());
        }
        fs_orbit_destroy(o);
        return kExitOk;
    }

    if (manifold->parsed()) {
        ParamsGuard g;
        if (!apply_model_params(g, cfg, common)) return kExitConfig;
        fs_patch* patch = nullptr;
        fs_status st;
        if (mf_which == "orbit-stable" || mf_which == "orbit-unstable") {
            fs_orbit* o = nullptr;
            st = fs_find_primary_orbit(g.p, 1, &o);
            if (st != FS_OK) return fail_domain("manifold (orbit)", st);
            st = fs_grow_orbit_manifold(g.p, o, mf_which == "orbit-stable" ? "stable" : "unstable",
                                        mf_cap, mf_seeds, &patch);
            fs_orbit_destroy(o);
        } else {
            st = fs_grow_equilibrium_manifold(g.p, mf_which.c_str(), mf_cap, mf_seeds, &patch);
        }
        if (st != FS_OK) return fail_domain("manifold", st);
        st = fs_patch_write_csv(patch, mf_out.c_str());
        if (st == FS_OK && !mf_sphere_out.empty())
            st = fs_patch_sphere_csv(patch, mf_sphere_out.c_str());
        if (st == FS_OK && !mf_section_out.empty())
            st = fs_patch_section_csv(patch, mf_section_out.c_str(), 3);
        fs_patch_destroy(patch);
        if (st != FS_OK) return fail_domain("manifold output", st);
        std::printf("wrote %s\n", mf_out.c_str());
        return kExitOk;
    }

    if (connect->parsed()) {
        ParamsGuard g;
        if (cn_mu_lo && cn_mu_hi) {
            CommonOpts tmp = common;
            if (!tmp.mu) tmp.mu = 0.0;
            if (!apply_model_params(g, cfg, tmp)) return kExitConfig;
            if (*cn_mu_lo >= *cn_mu_hi) {
                std::fprintf(stderr, "error: inverted bracket\n");
                return kExitConfig;
            }
            double mu_star = 0.0;
            fs_status st = fs_locate_bifurcation(g.p, *cn_mu_lo, *cn_mu_hi, cn_detector.c_str(),
                                                 cn_tol, &mu_star);
            if (st != FS_OK) return fail_domain("connect", st);
            std::printf("%s located at mu = %.10e\n", cn_detector.c_str(), mu_star);
            return kExitOk;
        }
        if (!apply_model_params(g, cfg, common)) return kExitConfig;
        double value = 0.0;
        fs_status st = fs_homoclinic_split(g.p, &value);
        if (st != FS_OK) return fail_domain("connect", st);
        std::printf("homoclinic split = %.12e\n", value);
        return kExitOk;
    }

    if (flip_cmd->parsed()) {
        if (fl_amin >= fl_amax) {
            std::fprintf(stderr, "error: inverted alpha bracket\n");
            return kExitConfig;
        }
        ParamsGuard g;
        CommonOpts tmp = common;
        tmp.alpha = fl_amin;
        tmp.mu = 0.0;
        if (!apply_model_params(g, cfg, tmp)) return kExitConfig;
        double alpha_star = 0.0;
        fs_status st =
            fs_locate_inclination_flip(g.p, fl_amin, fl_amax, fl_tol, &alpha_star, fl_out.c_str());
        if (st != FS_OK) return fail_domain("flip", st);
        std::printf("inclination flip at alpha = %.7f\n", alpha_star);
        std::printf("wrote %s\n", fl_out.c_str());
        return kExitOk;
    }

    if (project->parsed()) {
        fs_status st = fs_project_curves_csv(pj_in.c_str(), pj_out.c_str());
        if (st != FS_OK) return fail_domain("project", st);
        std::printf("wrote %s\n", pj_out.c_str());
        return kExitOk;
    }

    if (returnmap->parsed()) {
        ParamsGuard g;
        if (!apply_model_params(g, cfg, common)) return kExitConfig;
        fs_status st = fs_returnmap(g.p, rm_n, rm_skip, rm_out.c_str());
        if (st != FS_OK) return fail_domain("returnmap", st);
        std::printf("wrote %s\n", rm_out.c_str());
        return kExitOk;
    }

    return kExitConfig;
}
