#include <cmath>
#include <random>

#include "doctest.h"
#include "flip/error.hpp"
#include "flip/flow.hpp"
#include "flip/model.hpp"

using namespace flip;

TEST_CASE("z-axis trajectory follows the closed form") {
    Params p = Params::reference(0.5, 0.0);
    IntegratorConfig cfg;
    cfg.t_max = 1.0;
    Trajectory traj = integrate(p, {0, 0, 1}, cfg, {});
    CHECK(traj.termination == Termination::TimeLimit);
    CHECK(std::fabs(traj.final_state.x) <= 1e-12);
    CHECK(std::fabs(traj.final_state.y) <= 1e-12);
    CHECK(std::fabs(traj.final_state.z - std::exp(p.c * 1.0)) <= 1e-8);
}

TEST_CASE("plane events are polished onto the surface") {
    Params p = Params::reference(0.5, 0.001);
    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane({1, 0, 0}, 0.5, EventDirection::Any, EventAction::Record));
    IntegratorConfig cfg;
    cfg.t_max = 20.0;
    EigenData e = origin_eigens(p);
    Trajectory traj = integrate(p, 1e-7 * e.e_u, cfg, events);
    REQUIRE(!traj.events.empty());
    for (const EventRecord& ev : traj.events) CHECK(std::fabs(ev.state.x - 0.5) <= 1e-10);
}

TEST_CASE("sphere events satisfy their defining equation") {
    Params p = Params::reference(0.5, 0.0);
    EigenData e = origin_eigens(p);
    std::vector<EventSpec> events;
    events.push_back(EventSpec::sphere({0.5, 0, 0}, 0.6));
    IntegratorConfig cfg;
    cfg.t_max = 20.0;
    Trajectory traj = integrate(p, 1e-7 * e.e_u, cfg, events);
    REQUIRE(!traj.events.empty());
    for (const EventRecord& ev : traj.events)
        CHECK(std::fabs(norm(ev.state - Vec3{0.5, 0, 0}) - 0.6) <= 1e-10);
}

TEST_CASE("halving the tolerance keeps the endpoint consistent") {
    Params p = Params::reference(0.5, -0.002);
    Vec3 s0{0.2, 0.1, 0.05};
    IntegratorConfig c1;
    c1.t_max = 10.0;
    c1.rel_tol = 1e-9;
    c1.abs_tol = 1e-11;
    IntegratorConfig c2 = c1;
    c2.rel_tol = 5e-10;
    Trajectory a = integrate(p, s0, c1, {});
    Trajectory b = integrate(p, s0, c2, {});
    // both should be near the true solution well below 10x the tolerance scale
    CHECK(norm(a.final_state - b.final_state) <= 1e-6);
}

TEST_CASE("arclength cap terminates within tolerance") {
    Params p = Params::reference(0.5, 0.0);
    IntegratorConfig cfg;
    cfg.arclength_cap = 4.0;
    cfg.t_max = 1000.0;
    cfg.direction = TimeDirection::Backward;
    EigenData e = origin_eigens(p);
    Trajectory traj = integrate(p, 1e-5 * e.e_s, cfg, {});
    CHECK(traj.termination == Termination::ArclengthCap);
    CHECK(std::fabs(traj.arclength - 4.0) <= 1e-6);
    // accumulated arclength is non-decreasing along samples
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
        CHECK(traj.samples[i].arclength >= traj.samples[i - 1].arclength - 1e-12);
}

TEST_CASE("divergence guard reports the last state") {
    Params p = Params::reference(0.5, -0.002);
    IntegratorConfig cfg;
    cfg.t_max = 100.0;
    Trajectory traj = integrate(p, {0.5, 0.3, 0.02}, cfg, {});  // escapes into V
    CHECK(traj.termination == Termination::Divergence);
    CHECK(norm(traj.final_state) >= cfg.r_escape * 0.99);
}

TEST_CASE("forward then backward returns to the start") {
    Params p = Params::reference(0.5, -0.002);
    Vec3 s0{0.3, -0.1, 0.02};
    IntegratorConfig fwd;
    fwd.t_max = 5.0;
    Trajectory a = integrate(p, s0, fwd, {});
    IntegratorConfig bwd = fwd;
    bwd.direction = TimeDirection::Backward;
    Trajectory b = integrate(p, a.final_state, bwd, {});
    CHECK(norm(b.final_state - s0) <= 1e-5);
}

TEST_CASE("dense output reproduces sample states") {
    Params p = Params::reference(0.5, 0.001);
    IntegratorConfig cfg;
    cfg.t_max = 8.0;
    Trajectory traj = integrate(p, {0.2, 0.1, 0.01}, cfg, {});
    for (std::size_t i = 0; i < traj.samples.size(); i += 7) {
        const auto& s = traj.samples[i];
        CHECK(norm(traj.state_at(s.t) - s.state) <= 1e-9);
    }
    // dense derivative equals the vector field along the way
    for (double t = 0.5; t < 7.5; t += 1.7) {
        Vec3 x = traj.state_at(t);
        CHECK(norm(traj.derivative_at(t) - eval_field(p, x)) <= 1e-7 * std::max(1.0, norm(eval_field(p, x))));
    }
}

TEST_CASE("tangent transport carries the flow direction") {
    Params p = Params::reference(0.5, -0.002);
    IntegratorConfig cfg;
    cfg.t_max = 6.0;
    Vec3 s0{0.3, -0.1, 0.02};
    Trajectory traj = integrate(p, s0, cfg, {});
    Vec3 v0 = eval_field(p, s0);
    TransportResult tr = transport_tangent(p, traj, v0);
    Vec3 expected = eval_field(p, traj.final_state);
    CHECK(norm(tr.final_vector - expected) <= 1e-6 * norm(expected));
}

TEST_CASE("transports on the invariant axis follow the linear block") {
    Params p = Params::reference(0.5, 0.0);
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    Trajectory traj = integrate(p, {0, 0, 1}, cfg, {});
    TransportResult tv = transport_tangent(p, traj, {0, 0, 1});
    CHECK(std::fabs(tv.final_vector.z - std::exp(p.c * 2.0)) <= 1e-7);
    TransportResult tw = transport_adjoint(p, traj, {0, 0, 1});
    CHECK(std::fabs(tw.final_vector.z - std::exp(-p.c * 2.0)) <= 1e-6);
}

TEST_CASE("tangent-adjoint pairing is conserved") {
    Params p = Params::reference(0.5, 0.001);
    EigenData e = origin_eigens(p);
    IntegratorConfig cfg;
    cfg.t_max = 15.0;  // covers the primary excursion
    Trajectory traj = integrate(p, 1e-4 * e.e_u, cfg, {});

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vec3 v0{u(rng), u(rng), u(rng)};
        Vec3 w0{u(rng), u(rng), u(rng)};
        TransportResult tv = transport_tangent(p, traj, v0);
        TransportResult tw = transport_adjoint(p, traj, w0);
        double before = dot(v0, w0);
        double after = dot(tv.final_vector, tw.final_vector);
        double scale = std::max({std::fabs(before), std::fabs(after), 1e-3});
        CHECK(std::fabs(after - before) <= 1e-8 * scale);
    }
}

TEST_CASE("frame transport satisfies the volume identity") {
    Params p = Params::reference(0.5, -0.002);
    FrameTransport ft = transport_frame(p, {0.3, -0.1, 0.02}, 8.0);
    double d = det(ft.Phi);
    double liouville = std::exp(ft.trace_integral);
    CHECK(std::fabs(d - liouville) <= 1e-6 * std::fabs(liouville));
}

TEST_CASE("post-hoc scanning matches live events") {
    Params p = Params::reference(0.5, -0.002);
    EigenData e = origin_eigens(p);
    EventSpec plane = EventSpec::plane({0, 1, 0}, 0.0, EventDirection::Increasing);
    std::vector<EventSpec> events{plane};
    IntegratorConfig cfg;
    cfg.t_max = 25.0;
    Trajectory traj = integrate(p, 1e-7 * e.e_u, cfg, events);
    auto rescanned = scan_events(traj, plane);
    REQUIRE(rescanned.size() == traj.events.size());
    for (std::size_t i = 0; i < rescanned.size(); ++i) {
        CHECK(std::fabs(rescanned[i].t - traj.events[i].t) <= 1e-9);
        CHECK(rescanned[i].direction == traj.events[i].direction);
    }
}

TEST_CASE("backward trajectories report physical crossing directions") {
    Params p = Params::reference(0.5, 0.0);
    // backward from above the plane z = 0.5 along the contracting axis:
    // physically z grows backward, so z - 0.6 increases through zero
    IntegratorConfig cfg;
    cfg.direction = TimeDirection::Backward;
    cfg.t_max = 1.0;
    Trajectory traj = integrate(p, {0, 0, 0.5}, cfg, {});
    auto ups = scan_events(traj, EventSpec::plane({0, 0, 1}, 0.6, EventDirection::Increasing));
    auto downs = scan_events(traj, EventSpec::plane({0, 0, 1}, 0.6, EventDirection::Decreasing));
    CHECK(ups.size() == 1);
    CHECK(downs.empty());
}

TEST_CASE("invalid tolerances are rejected") {
    Params p = Params::reference(0.5, 0.0);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-2;
    CHECK_THROWS_AS((void)integrate(p, {0, 0, 1}, cfg, {}), Error);
}
