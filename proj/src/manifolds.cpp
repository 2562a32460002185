#include "flip/manifolds.hpp"

#include <algorithm>
#include <cmath>

#include "flip/error.hpp"

namespace flip {

namespace {

constexpr double kSeed1D = 1e-7;
constexpr double kSeed2D = 1e-5;

Trajectory grow_one(const Params& p, const Vec3& seed, bool backward, double cap) {
    IntegratorConfig cfg;
    cfg.direction = backward ? TimeDirection::Backward : TimeDirection::Forward;
    cfg.arclength_cap = cap;
    cfg.t_max = 10000.0;
    return integrate(p, seed, cfg, {});
}

// angles clustered toward +-pi/2 (the strong-stable axis) via a cosine map
std::vector<double> clustered_angles(int n) {
    std::vector<double> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        double t = double(k) / n;                       // [0, 1)
        double base = 2.0 * M_PI * t;                   // uniform
        double warp = base - 0.5 * std::sin(2.0 * base);  // clusters near pi/2 and 3pi/2
        out.push_back(warp);
    }
    return out;
}

// crossings of a scalar event grouped by per-trajectory crossing index
std::vector<std::vector<std::vector<Vec3>>> crossings_by_index(const ManifoldPatch& patch,
                                                               const EventSpec& spec,
                                                               int max_index) {
    // result[index][traj] = list of points (usually one)
    std::vector<std::vector<std::vector<Vec3>>> table;
    for (std::size_t j = 0; j < patch.trajectories.size(); ++j) {
        std::vector<EventRecord> evs = scan_events(patch.trajectories[j], spec);
        for (std::size_t k = 0; k < evs.size(); ++k) {
            if (max_index > 0 && (int)k >= max_index) break;
            if (table.size() <= k) table.resize(k + 1);
            if (table[k].size() < patch.trajectories.size())
                table[k].resize(patch.trajectories.size());
            table[k][j].push_back(evs[k].state);
        }
    }
    return table;
}

void string_into_curves(const std::vector<std::vector<Vec3>>& per_traj, CurveSet& out) {
    // collect in seed order, then split at gaps larger than 10x the median
    std::vector<Vec3> pts;
    for (const auto& cell : per_traj)
        for (const Vec3& pt : cell) pts.push_back(pt);
    if (pts.empty()) return;
    if (pts.size() == 1) {
        out.curves.push_back({{pts[0]}, false});
        return;
    }
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) gaps.push_back(norm(pts[i + 1] - pts[i]));
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    double threshold = 10.0 * std::max(median, 1e-12);

    CurveSet::Curve cur;
    cur.points.push_back(pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (gaps[i - 1] > threshold) {
            if (cur.points.size() > 1) out.curves.push_back(cur);
            cur = {};
        }
        cur.points.push_back(pts[i]);
    }
    if (!cur.points.empty()) {
        if (cur.points.size() > 1) {
            double closure = norm(cur.points.front() - cur.points.back());
            cur.closed = closure <= threshold;
        }
        out.curves.push_back(cur);
    }
}

}  // namespace

ManifoldPatch grow_equilibrium_manifold(const Params& p, const Equilibrium& eq,
                                        ManifoldSelect which, double cap, int n_seeds) {
    if (!eq.eigen && norm(eq.location) > 1e-6)
        raise(errc::eigenstructure_missing, "equilibrium lacks a real saddle eigenframe");
    EigenData eig = eq.eigen ? *eq.eigen : origin_eigens(p);

    ManifoldPatch patch;
    patch.owner = norm(eq.location) <= 1e-6 ? "origin" : "q";
    patch.owner_point = eq.location;
    patch.cap = cap;

    switch (which) {
        case ManifoldSelect::Unstable1D: {
            patch.dimension = 1;
            patch.stable = false;
            for (double s : {+1.0, -1.0}) {
                Vec3 seed = eq.location + s * kSeed1D * eig.e_u;
                patch.seeds.push_back(seed);
                patch.trajectories.push_back(grow_one(p, seed, false, cap));
            }
            break;
        }
        case ManifoldSelect::StrongStable1D: {
            patch.dimension = 1;
            patch.stable = true;
            for (double s : {+1.0, -1.0}) {
                Vec3 seed = eq.location + s * kSeed1D * eig.e_ss;
                patch.seeds.push_back(seed);
                patch.trajectories.push_back(grow_one(p, seed, true, cap));
            }
            break;
        }
        case ManifoldSelect::Stable2D: {
            patch.dimension = 2;
            patch.stable = true;
            for (double phi : clustered_angles(n_seeds)) {
                Vec3 seed = eq.location
                          + kSeed2D * (std::cos(phi) * eig.e_s + std::sin(phi) * eig.e_ss);
                patch.seeds.push_back(seed);
                patch.trajectories.push_back(grow_one(p, seed, true, cap));
            }
            break;
        }
    }
    return patch;
}

void merge_patch(ManifoldPatch& into, ManifoldPatch&& extra) {
    for (auto& s : extra.seeds) into.seeds.push_back(s);
    for (auto& t : extra.trajectories) into.trajectories.push_back(std::move(t));
}

ManifoldPatch grow_orbit_manifold(const Params& p, const PeriodicOrbit& orbit,
                                  OrbitManifoldSelect which, double cap, int n_seeds,
                                  double seed_offset) {
    if (orbit.orientability == Orientability::Complex)
        raise(errc::complex_multipliers, "orbit manifolds need real multipliers");

    const double lambda = which == OrbitManifoldSelect::Stable ? orbit.L1.real() : orbit.L2.real();

    // monodromy eigenvector for the selected multiplier
    Mat3 A = orbit.monodromy;
    A(0, 0) -= lambda;
    A(1, 1) -= lambda;
    A(2, 2) -= lambda;
    Vec3 cands[3] = {cross(row(A, 0), row(A, 1)), cross(row(A, 0), row(A, 2)),
                     cross(row(A, 1), row(A, 2))};
    Vec3 v0 = cands[0];
    for (int i = 1; i < 3; ++i)
        if (norm(cands[i]) > norm(v0)) v0 = cands[i];
    v0 = normalized(v0);
    {
        Vec3 resid = orbit.monodromy * v0 - lambda * v0;
        if (norm(resid) > 1e-6 * std::fabs(lambda))
            raise(errc::complex_multipliers, "Floquet bundle direction residual too large");
    }

    ManifoldPatch patch;
    patch.owner = orbit.label.empty() ? "orbit" : orbit.label;
    patch.owner_point = orbit.fixed_point;
    patch.dimension = 2;
    patch.stable = which == OrbitManifoldSelect::Stable;
    patch.cap = cap;
    patch.bundle_orientable = lambda > 0.0;

    const double eps = seed_offset;
    const bool backward = which == OrbitManifoldSelect::Stable;

    // march the frame along the orbit, peeling off the transported bundle
    // direction at each requested phase
    int half = std::max(1, n_seeds / 2);
    Vec3 gamma = orbit.fixed_point;
    Vec3 v = v0;
    for (int j = 0; j < half; ++j) {
        Vec3 vn = normalized(v);
        for (double s : {+1.0, -1.0}) {
            Vec3 seed = gamma + s * eps * vn;
            patch.seeds.push_back(seed);
            patch.trajectories.push_back(grow_one(p, seed, backward, cap));
        }
        if (j + 1 < half) {
            FrameTransport ft = transport_frame(p, gamma, orbit.period / half);
            v = ft.Phi * vn;
            gamma = ft.final_state;
        }
    }
    return patch;
}

CurveSet intersect_with_sphere(const ManifoldPatch& patch, const SphereSpec& sphere) {
    EventSpec spec = EventSpec::sphere(sphere.center, sphere.R);
    CurveSet out;
    auto table = crossings_by_index(patch, spec, 0);
    if (patch.dimension == 1) {
        for (const auto& level : table)
            for (const auto& cell : level)
                for (const Vec3& pt : cell) out.curves.push_back({{pt}, false});
        return out;
    }
    for (const auto& level : table) string_into_curves(level, out);
    return out;
}

CurveSet section_trace(const ManifoldPatch& patch, const SectionPlane& section,
                       int max_crossings) {
    EventSpec spec = EventSpec::plane(section.normal, section.offset, section.crossing);
    CurveSet out;
    auto table = crossings_by_index(patch, spec, max_crossings);
    for (const auto& level : table) string_into_curves(level, out);
    return out;
}

}  // namespace flip
