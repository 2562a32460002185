#ifndef FLIP_CSV_HPP
#define FLIP_CSV_HPP

#include <string>
#include <utility>
#include <vector>

#include "flip/flow.hpp"
#include "flip/winding.hpp"

namespace flip {

struct PeriodicOrbit;
struct ManifoldPatch;
struct CurveSet;
struct ProjectedSet;
struct BifurcationPoint;

// All writers emit a header row and serialize numbers with 17 significant
// digits, so identical inputs give byte-identical files.
std::string format_double(double v);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_events_csv(const std::string& path, const Trajectory& traj);
void write_sweep_csv(const std::string& path, const SweepGrid& grid);
void write_branch_csv(const std::string& path,
                      const std::vector<std::pair<double, PeriodicOrbit>>& branch);
void write_returnmap_csv(const std::string& path,
                         const std::vector<std::pair<double, double>>& pairs);
void write_patch_csv(const std::string& path, const ManifoldPatch& patch);
void write_curveset_csv(const std::string& path, const CurveSet& cs);
CurveSet read_curveset_csv(const std::string& path);
void write_projected_csv(const std::string& path, const ProjectedSet& ps);
void write_bifurcations_csv(const std::string& path, const std::vector<BifurcationPoint>& pts);

}  // namespace flip

#endif
