#ifndef FLIP_FLOW_HPP
#define FLIP_FLOW_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "flip/model.hpp"
#include "flip/vec.hpp"

namespace flip {

enum class TimeDirection { Forward, Backward };

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.25;
    double t_max = 5000.0;
    TimeDirection direction = TimeDirection::Forward;
    std::optional<double> arclength_cap;
    double r_escape = 50.0;    // divergence guard on the state norm
    bool store_dense = true;   // keep per-step interpolants for dense evaluation
    bool store_samples = true; // keep per-step (t, state, arclength) samples
};

enum class EventKind { Plane, Sphere, HalfSpaceEntry, Proximity };
enum class EventDirection { Any, Increasing, Decreasing };
enum class EventAction { Record, Terminate };

struct EventSpec {
    EventKind kind = EventKind::Plane;
    Vec3 normal{1, 0, 0};   // plane
    double offset = 0.0;    // plane
    Vec3 center{0, 0, 0};   // sphere / proximity
    double radius = 0.0;    // sphere / proximity
    EventDirection direction = EventDirection::Any;
    EventAction action = EventAction::Record;
    int max_count = 0;  // 0 = unlimited; otherwise terminate once reached

    static EventSpec plane(const Vec3& n, double d,
                           EventDirection dir = EventDirection::Any,
                           EventAction act = EventAction::Record, int cap = 0);
    static EventSpec sphere(const Vec3& c, double R,
                            EventDirection dir = EventDirection::Any,
                            EventAction act = EventAction::Record, int cap = 0);
    static EventSpec half_space_entry();  // terminates on entering {x<=0, y<=0}
    static EventSpec proximity(const Vec3& target, double r,
                               EventDirection dir = EventDirection::Any,
                               EventAction act = EventAction::Record, int cap = 0);

    double value(const Vec3& s) const;
};

struct EventRecord {
    int event_id = 0;
    double t = 0.0;
    Vec3 state;
    int direction = 0;  // +1 increasing crossing, -1 decreasing
};

enum class Termination {
    TimeLimit,
    ArclengthCap,
    Event,       // a terminating event fired
    EventCap,    // an event reached its max_count
    Divergence,
    StepUnderflow,
    None,
};

struct Trajectory {
    double t0 = 0.0;
    Vec3 initial_state;
    Vec3 final_state;
    double t_final = 0.0;
    double arclength = 0.0;
    Termination termination = Termination::None;
    int terminating_event = -1;
    std::vector<EventRecord> events;

    // (t, state, cumulative arclength) at accepted step ends, first entry is t0
    struct Sample {
        double t;
        Vec3 state;
        double arclength;
    };
    std::vector<Sample> samples;

    // dense interpolation data, one record per accepted step; the fourth
    // component carries cumulative arclength
    struct DenseStep {
        double t;  // left endpoint (physical time)
        double h;  // signed step
        std::array<double, 4> r1, r2, r3, r4, r5;
    };
    std::vector<DenseStep> dense;

    bool forward() const { return t_final >= t0; }
    double duration() const { return std::fabs(t_final - t0); }

    // dense-output evaluation; t must lie inside the integrated span
    Vec3 state_at(double t) const;
    Vec3 derivative_at(double t) const;
    double arclength_at(double t) const;
};

// Adaptive 5(4) Dormand-Prince integration with event location on the dense
// output. Local error per step is kept below rel_tol*|s| + abs_tol per
// component. Events are polished to |g| <= 1e-12. Termination, including the
// divergence guard and step-size underflow, is reported on the Trajectory.
Trajectory integrate(const Params& p, const State& s0, const IntegratorConfig& cfg,
                     const std::vector<EventSpec>& events = {});

// Post-hoc crossing extraction on a stored dense trajectory. The spec's
// directionality filter applies; grazing touches are skipped. Crossings are
// polished to |g| <= 1e-12 like live events.
std::vector<EventRecord> scan_events(const Trajectory& traj, const EventSpec& spec);

// Minimizes |x(t) - target| over [t_lo, t_hi] on the dense output.
struct ClosestPoint {
    double t;
    Vec3 state;
    double distance;
};
ClosestPoint closest_approach(const Trajectory& traj, const Vec3& target, double t_lo, double t_hi);

// Tangent (variational) and adjoint transport along a trajectory. The base
// orbit is re-integrated together with the transported vector at the same
// tolerances, from the trajectory's initial state over its time span.
struct TransportResult {
    std::vector<std::pair<double, Vec3>> path;  // (t, v(t)) at step ends
    Vec3 final_vector;
};

TransportResult transport_tangent(const Params& p, const Trajectory& traj, const Vec3& v0);
TransportResult transport_adjoint(const Params& p, const Trajectory& traj, const Vec3& w0);

// Forward transport of one tangent vector until the trajectory re-enters the
// sphere |x| = radius (first decreasing crossing after |x| exceeded the
// arming radius). Used by the orientation test along the homoclinic loop.
struct TangentAtSphere {
    Vec3 state;
    Vec3 tangent;
    double t = 0.0;
    bool hit = false;
};
TangentAtSphere transport_tangent_to_sphere(const Params& p, const Vec3& x0, const Vec3& v0,
                                            double radius, double arm_radius, double t_max,
                                            TimeDirection dir = TimeDirection::Forward);

// Fundamental matrix over [0, T] from a starting state, plus the integral of
// trace(Df) along the way (Liouville check: det Phi = exp of that integral).
struct FrameTransport {
    Mat3 Phi;
    double trace_integral = 0.0;
    Vec3 final_state;
};
FrameTransport transport_frame(const Params& p, const State& s0, double T,
                               double rel_tol = 1e-10, double abs_tol = 1e-12);

}  // namespace flip

#endif
