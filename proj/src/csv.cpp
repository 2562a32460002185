#include "flip/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "flip/connections.hpp"
#include "flip/error.hpp"
#include "flip/manifolds.hpp"
#include "flip/orbits.hpp"
#include "flip/projection.hpp"

namespace flip {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(errc::io_error, "cannot open " + path + " for writing");
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t,x,y,z,arclength\n";
    for (const Trajectory::Sample& s : traj.samples)
        out << format_double(s.t) << ',' << format_double(s.state.x) << ','
            << format_double(s.state.y) << ',' << format_double(s.state.z) << ','
            << format_double(s.arclength) << '\n';
}

void write_events_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "event_id,t,x,y,z,direction\n";
    for (const EventRecord& e : traj.events)
        out << e.event_id << ',' << format_double(e.t) << ',' << format_double(e.state.x) << ','
            << format_double(e.state.y) << ',' << format_double(e.state.z) << ',' << e.direction
            << '\n';
}

void write_sweep_csv(const std::string& path, const SweepGrid& grid) {
    std::ofstream out = open_out(path);
    out << "alpha,mu,zeta,crossings,termination\n";
    for (int ia = 0; ia < grid.spec.n_alpha; ++ia)
        for (int imu = 0; imu < grid.spec.n_mu; ++imu) {
            const WindingResult& r = grid.cell(ia, imu);
            int zeta = r.saturated || r.termination != ZetaTermination::ReachedBoundary ? -1
                                                                                        : r.zeta;
            out << format_double(grid.alphas[ia]) << ',' << format_double(grid.mus[imu]) << ','
                << zeta << ',' << r.crossing_count << ',' << zeta_termination_name(r.termination)
                << '\n';
        }
}

void write_branch_csv(const std::string& path,
                      const std::vector<std::pair<double, PeriodicOrbit>>& branch) {
    std::ofstream out = open_out(path);
    out << "mu,period,fixed_x,fixed_z,re_L1,im_L1,re_L2,im_L2,orientability\n";
    for (const auto& [mu, o] : branch)
        out << format_double(mu) << ',' << format_double(o.period) << ','
            << format_double(o.fixed_point.x) << ',' << format_double(o.fixed_point.z) << ','
            << format_double(o.L1.real()) << ',' << format_double(o.L1.imag()) << ','
            << format_double(o.L2.real()) << ',' << format_double(o.L2.imag()) << ','
            << orientability_name(o.orientability) << '\n';
}

void write_returnmap_csv(const std::string& path,
                         const std::vector<std::pair<double, double>>& pairs) {
    std::ofstream out = open_out(path);
    out << "x_i,x_ip1\n";
    for (const auto& [a, b] : pairs) out << format_double(a) << ',' << format_double(b) << '\n';
}

void write_patch_csv(const std::string& path, const ManifoldPatch& patch) {
    std::ofstream out = open_out(path);
    out << "traj_id,t,x,y,z,arclength\n";
    for (std::size_t j = 0; j < patch.trajectories.size(); ++j)
        for (const Trajectory::Sample& s : patch.trajectories[j].samples)
            out << j << ',' << format_double(s.t) << ',' << format_double(s.state.x) << ','
                << format_double(s.state.y) << ',' << format_double(s.state.z) << ','
                << format_double(s.arclength) << '\n';
}

void write_curveset_csv(const std::string& path, const CurveSet& cs) {
    std::ofstream out = open_out(path);
    out << "curve_id,seq,x,y,z\n";
    for (std::size_t c = 0; c < cs.curves.size(); ++c)
        for (std::size_t i = 0; i < cs.curves[c].points.size(); ++i) {
            const Vec3& pt = cs.curves[c].points[i];
            out << c << ',' << i << ',' << format_double(pt.x) << ',' << format_double(pt.y)
                << ',' << format_double(pt.z) << '\n';
        }
}

CurveSet read_curveset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open " + path);
    CurveSet cs;
    std::string line;
    if (!std::getline(in, line)) raise(errc::io_error, "empty curve-set file " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        long curve_id = -1, seq = -1;
        double xyz[3];
        try {
            std::getline(ss, field, ',');
            curve_id = std::stol(field);
            std::getline(ss, field, ',');
            seq = std::stol(field);
            for (int k = 0; k < 3; ++k) {
                std::getline(ss, field, ',');
                xyz[k] = std::stod(field);
            }
        } catch (const std::exception&) {
            raise(errc::io_error, "malformed curve-set row in " + path);
        }
        (void)seq;
        if (curve_id < 0) raise(errc::io_error, "negative curve id in " + path);
        if (cs.curves.size() <= std::size_t(curve_id)) cs.curves.resize(curve_id + 1);
        cs.curves[curve_id].points.push_back({xyz[0], xyz[1], xyz[2]});
    }
    return cs;
}

void write_projected_csv(const std::string& path, const ProjectedSet& ps) {
    std::ofstream out = open_out(path);
    out << "curve_id,seq,px,py\n";
    for (std::size_t c = 0; c < ps.curves.size(); ++c)
        for (std::size_t i = 0; i < ps.curves[c].points.size(); ++i)
            out << c << ',' << i << ',' << format_double(ps.curves[c].points[i].x) << ','
                << format_double(ps.curves[c].points[i].y) << '\n';
}

void write_bifurcations_csv(const std::string& path, const std::vector<BifurcationPoint>& pts) {
    std::ofstream out = open_out(path);
    out << "kind,alpha,mu,bracket,loops_gamma_o,loops_gamma_t\n";
    for (const BifurcationPoint& pt : pts)
        out << pt.kind << ',' << format_double(pt.alpha) << ',' << format_double(pt.mu) << ','
            << format_double(pt.bracket) << ',' << pt.loops_gamma_o << ',' << pt.loops_gamma_t
            << '\n';
}

}  // namespace flip
