#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ltlgrid/abstraction.hpp"
#include "ltlgrid/rng.hpp"
#include "support/oracles.hpp"

using namespace ltlgrid;

namespace {

constexpr double kPi = 3.14159265358979323846;

State5 end_state(const Trajectory& tr) { return tr.samples.back(); }

double state_distance(const State5& a, const State5& b) {
    return std::max({std::abs(a.px - b.px), std::abs(a.py - b.py),
                     std::abs(a.heading - b.heading), std::abs(a.speed - b.speed),
                     std::abs(a.tau - b.tau)});
}

// Closed-form constant-control arc of the bicycle model (a = 0, steer != 0).
State5 arc_state(const State5& x0, double steer, double wheelbase, double t) {
    const double omega = x0.speed / wheelbase * std::sin(steer);
    State5 s;
    s.heading = x0.heading + omega * t;
    const double phi0 = x0.heading + steer;
    const double phi = s.heading + steer;
    s.px = x0.px + x0.speed / omega * (std::sin(phi) - std::sin(phi0));
    s.py = x0.py - x0.speed / omega * (std::cos(phi) - std::cos(phi0));
    s.speed = x0.speed;
    s.tau = x0.tau + t;
    return s;
}

AbstractionConfig small_config() {
    AbstractionConfig cfg;
    cfg.region = SampleRegion::Rect;
    cfg.x_min = 0;
    cfg.x_max = 200;
    cfg.y_min = 0;
    cfg.y_max = 200;
    cfg.tau_min = 0;
    cfg.tau_max = 2;
    cfg.tau_limit = 100;
    cfg.vertex_budget = 40;
    cfg.fan_size = 4;
    cfg.root_count = 1;
    return cfg;
}

}  // namespace

TEST_CASE("integrate_bicycle: straight coasting") {
    VehicleParams veh;
    State5 x0{0, 0, 0, 10, 0};
    std::vector<ControlSegment> u{{{0, 0}, 1.0}};
    auto tr = integrate_bicycle(x0, u, 0.01, 1.0, veh);
    REQUIRE(tr.samples.size() == 101);
    CHECK(end_state(tr).px == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(end_state(tr).py == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(end_state(tr).heading == 0.0);
    CHECK(tr.duration() == doctest::Approx(1.0));
}

TEST_CASE("integrate_bicycle: straight acceleration from rest") {
    VehicleParams veh;
    State5 x0{0, 0, 0, 0, 0};
    std::vector<ControlSegment> u{{{0, 1.0}, 2.0}};
    auto tr = integrate_bicycle(x0, u, 0.01, 2.0, veh);
    CHECK(end_state(tr).px == doctest::Approx(2.0).epsilon(1e-10));  // v0*T + a*T^2/2
    CHECK(end_state(tr).speed == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("integrate_bicycle: constant-curvature arc matches the closed form") {
    VehicleParams veh;
    veh.wheelbase = 2.7;
    State5 x0{5, -3, 0.3, 5, 1};
    const double steer = 0.1;
    std::vector<ControlSegment> u{{{steer, 0}, 2.0}};
    auto tr = integrate_bicycle(x0, u, 0.005, 2.0, veh);
    const State5 expect = arc_state(x0, steer, veh.wheelbase, 2.0);
    CHECK(std::abs(end_state(tr).heading - expect.heading) < 1e-6);
    CHECK(std::abs(end_state(tr).px - expect.px) < 1e-6);
    CHECK(std::abs(end_state(tr).py - expect.py) < 1e-6);
    // heading change = v/l * sin(steer) * T
    CHECK(end_state(tr).heading - x0.heading ==
          doctest::Approx(5.0 / 2.7 * std::sin(0.1) * 2.0).epsilon(1e-9));
}

TEST_CASE("integrate_bicycle: tau advances exactly") {
    VehicleParams veh;
    State5 x0{0, 0, 0, 3, 0.5};
    std::vector<ControlSegment> u{{{0.05, 0.5}, 1.0}};
    auto tr = integrate_bicycle(x0, u, 0.0125, 1.0, veh);
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        REQUIRE(tr.samples[i].tau == 0.5 + static_cast<double>(i) * 0.0125);
    }
}

TEST_CASE("integrate_bicycle: control bounds and schedule validation") {
    VehicleParams veh;
    State5 x0{0, 0, 0, 5, 0};
    std::vector<ControlSegment> bad_steer{{{veh.max_steer + 0.1, 0}, 1.0}};
    CHECK_THROWS_AS(integrate_bicycle(x0, bad_steer, 0.01, 1.0, veh), std::domain_error);
    std::vector<ControlSegment> short_schedule{{{0, 0}, 0.5}};
    CHECK_THROWS_AS(integrate_bicycle(x0, short_schedule, 0.01, 1.0, veh),
                    std::invalid_argument);
    std::vector<ControlSegment> ok{{{0, 0}, 1.0}};
    CHECK_THROWS_AS(integrate_bicycle(x0, ok, 0.01, 1.003, veh), std::invalid_argument);
}

TEST_CASE("footprint_polygon: axis-aligned, rotated, and hand-checked corners") {
    FootprintSpec f{4.0, 2.0, 0.0};
    State5 x{10, 20, 0, 0, 0};
    auto r0 = footprint_polygon(x, f);
    auto c0 = r0.corners();
    CHECK(c0[0][0] == doctest::Approx(12.0));
    CHECK(c0[0][1] == doctest::Approx(21.0));
    CHECK(c0[2][0] == doctest::Approx(8.0));
    CHECK(c0[2][1] == doctest::Approx(19.0));

    x.heading = kPi / 2;
    auto r90 = footprint_polygon(x, f);
    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
    for (auto c : r90.corners()) {
        min_x = std::min(min_x, c[0]);
        max_x = std::max(max_x, c[0]);
        min_y = std::min(min_y, c[1]);
        max_y = std::max(max_y, c[1]);
    }
    CHECK(max_x - min_x == doctest::Approx(2.0));  // length and width swap
    CHECK(max_y - min_y == doctest::Approx(4.0));

    x.heading = kPi / 4;
    auto r45 = footprint_polygon(x, f);
    const double s = std::sqrt(2.0) / 2;
    // corner = centre + 2*(cos,sin) + 1*(-sin,cos), hand-rotated
    CHECK(r45.corners()[0][0] == doctest::Approx(10 + 2 * s - 1 * s).epsilon(1e-9));
    CHECK(r45.corners()[0][1] == doctest::Approx(20 + 2 * s + 1 * s).epsilon(1e-9));
}

TEST_CASE("sweep_voxelize: stationary sample covers one time slab") {
    GridSpec g({{0.0, 16.0}, {0.0, 16.0}, {0.0, 4.0}}, 9);  // 8x8x8 cells
    FootprintSpec f{3.0, 1.5, 0.0};
    Trajectory tr;
    tr.step = 0.1;
    tr.samples = {{8, 8, 0.2, 0, 1.3}};
    auto bits = sweep_voxelize(tr, f, g);
    REQUIRE(bits.count() > 0);
    const std::uint64_t slab = g.quantize(2, 1.3);
    std::vector<std::uint64_t> idx;
    bits.collect(idx);
    for (auto i : idx) {
        const auto cells = oracles::decode_cells(i, g);
        REQUIRE(cells[2] == slab);
        // cell-wise check against the strict SAT oracle
        Box cb = oracles::cell_box(i, g);
        REQUIRE(oracles::rect_box_overlap_naive(8 + 0, 8 + 0, 1.5, 0.75, 0.2, cb.lo[0], cb.hi[0],
                                                cb.lo[1], cb.hi[1]));
    }
}

TEST_CASE("sweep_voxelize: matches the naive per-cell oracle on random motions") {
    GridSpec g({{0.0, 24.0}, {0.0, 24.0}, {0.0, 3.0}}, 9);
    FootprintSpec f{3.4, 1.6, -0.8};
    VehicleParams veh;
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        State5 x0{rng.uniform(8, 16), rng.uniform(8, 16), rng.uniform(-kPi, kPi),
                  rng.uniform(2, 6), rng.uniform(0.2, 1.5)};
        std::vector<ControlSegment> u{{{rng.uniform(-0.3, 0.3), rng.uniform(-1, 1)}, 0.5}};
        auto tr = integrate_bicycle(x0, u, 0.025, 0.5, veh);
        auto bits = sweep_voxelize(tr, f, g);
        // oracle: a cell is swept iff it overlaps some sample's rectangle in
        // x-y and contains the sample's tau slab
        for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
            Box cb = oracles::cell_box(i, g);
            bool expect = false;
            for (const auto& s : tr.samples) {
                if (!(s.tau >= cb.lo[2] && s.tau < cb.hi[2])) continue;
                auto rect = footprint_polygon(s, f);
                const double heading = std::atan2(rect.sin_h, rect.cos_h);
                if (oracles::rect_box_overlap_naive(rect.cx, rect.cy, rect.half_length,
                                                    rect.half_width, heading, cb.lo[0], cb.hi[0],
                                                    cb.lo[1], cb.hi[1])) {
                    expect = true;
                    break;
                }
            }
            REQUIRE(bits.test(i) == expect);
        }
    }
}

TEST_CASE("sweep_voxelize: straight sweep advances monotonically per slab") {
    GridSpec g({{0.0, 32.0}, {0.0, 32.0}, {0.0, 1.0}}, 12);  // 16x16x16
    FootprintSpec f{2.0, 1.0, 0.0};
    VehicleParams veh;
    State5 x0{4, 16, 0, 16, 0.0};
    std::vector<ControlSegment> u{{{0, 0}, 0.9}};
    auto tr = integrate_bicycle(x0, u, 0.0125, 0.9, veh);
    auto bits = sweep_voxelize(tr, f, g);
    std::vector<std::uint64_t> idx;
    bits.collect(idx);
    std::vector<double> min_x(16, 1e9), max_x(16, -1e9);
    for (auto i : idx) {
        const auto cells = oracles::decode_cells(i, g);
        min_x[cells[2]] = std::min(min_x[cells[2]], static_cast<double>(cells[0]));
        max_x[cells[2]] = std::max(max_x[cells[2]], static_cast<double>(cells[0]));
    }
    const std::uint64_t last_slab = g.quantize(2, 0.9);
    for (std::uint64_t t = 1; t <= last_slab; ++t) {
        CHECK(min_x[t] >= min_x[t - 1]);
        CHECK(max_x[t] >= max_x[t - 1]);
    }
}

TEST_CASE("sweep_voxelize: leaving the workspace throws") {
    GridSpec g({{0.0, 10.0}, {0.0, 10.0}, {0.0, 1.0}}, 9);
    FootprintSpec f{2.0, 1.0, 0.0};
    Trajectory tr;
    tr.step = 0.1;
    tr.samples = {{9.8, 5, 0, 0, 0.5}};  // footprint pokes past x = 10
    CHECK_THROWS_AS(sweep_voxelize(tr, f, g), std::domain_error);
    Trajectory late;
    late.step = 0.1;
    late.samples = {{5, 5, 0, 0, 1.5}};  // tau outside
    CHECK_THROWS_AS(sweep_voxelize(late, f, g), std::domain_error);
}

TEST_CASE("build_abstraction: smoke instance is connected and feasible") {
    auto cfg = small_config();
    cfg.vertex_budget = 10;
    cfg.fan_size = 2;
    auto ts = build_abstraction(cfg, 7);
    CHECK(ts.num_states() == 10);
    CHECK(ts.num_edges() >= 9);
    // weak connectivity from the single root
    std::vector<char> seen(ts.num_states(), 0);
    seen[0] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& e : ts.edges) {
            if (seen[e.from] && !seen[e.to]) {
                seen[e.to] = 1;
                changed = true;
            }
        }
    }
    for (std::size_t i = 0; i < ts.num_states(); ++i) CHECK(seen[i]);
    // invariants
    for (std::size_t e = 0; e < ts.num_edges(); ++e) {
        CHECK(ts.costs[e] >= 0);
        CHECK(state_distance(ts.trajectories[e].front(), ts.states[ts.edges[e].from]) <= cfg.eps_end);
        CHECK(state_distance(ts.trajectories[e].back(), ts.states[ts.edges[e].to]) <= cfg.eps_end);
    }
}

TEST_CASE("build_abstraction: deterministic given the seed, exact edge targets") {
    auto cfg = small_config();
    cfg.target_edges = 120;
    cfg.vertex_budget = 0;  // ignored in target mode
    auto a = build_abstraction(cfg, 99);
    auto b = build_abstraction(cfg, 99);
    CHECK(a.num_edges() == 120);
    REQUIRE(a.num_edges() == b.num_edges());
    REQUIRE(a.num_states() == b.num_states());
    for (std::size_t i = 0; i < a.num_states(); ++i) {
        CHECK(state_distance(a.states[i], b.states[i]) == 0.0);
    }
    auto c = build_abstraction(cfg, 100);
    bool differs = c.num_states() != a.num_states();
    if (!differs) {
        for (std::size_t i = 0; i < a.num_states() && !differs; ++i) {
            differs = state_distance(a.states[i], c.states[i]) != 0.0;
        }
    }
    CHECK(differs);
}

TEST_CASE("build_abstraction: every edge re-integrates to its stored endpoint") {
    auto cfg = small_config();
    cfg.target_edges = 80;
    auto ts = build_abstraction(cfg, 3);
    for (std::size_t e = 0; e < ts.num_edges(); ++e) {
        auto re = integrate_bicycle(ts.trajectories[e].front(), ts.controls[e],
                                    ts.trajectories[e].step, ts.trajectories[e].duration(),
                                    cfg.vehicle);
        CHECK(state_distance(end_state(re), ts.states[ts.edges[e].to]) <= cfg.eps_end);
    }
}

TEST_CASE("build_abstraction: infeasible configuration throws") {
    auto cfg = small_config();
    cfg.fan_size = 100;  // exceeds the control grid
    CHECK_THROWS_AS(build_abstraction(cfg, 1), std::invalid_argument);
}

TEST_CASE("translate_system: identity, rotation, time shift") {
    auto cfg = small_config();
    cfg.target_edges = 40;
    auto ts = build_abstraction(cfg, 11);

    auto same = translate_system(ts, {});
    for (std::size_t i = 0; i < ts.num_states(); ++i) {
        CHECK(state_distance(same.states[i], ts.states[i]) == 0.0);
    }

    // Rotation + translation keeps dynamic feasibility: re-integration of the
    // transformed trajectory with the same controls reproduces its endpoint.
    Translation2 delta{15.5, -7.25, 0.6, 2.0};
    auto moved = translate_system(ts, delta);
    CHECK(moved.num_edges() == ts.num_edges());
    for (std::size_t e = 0; e < moved.num_edges(); ++e) {
        CHECK(moved.costs[e] == ts.costs[e]);
        auto re = integrate_bicycle(moved.trajectories[e].front(), moved.controls[e],
                                    moved.trajectories[e].step, moved.trajectories[e].duration(),
                                    cfg.vehicle);
        CHECK(state_distance(end_state(re), moved.trajectories[e].back()) <= cfg.eps_end);
    }

    // Pure time shift preserves pairwise tau differences.
    auto shifted = translate_system(ts, {0, 0, 0, 3.5});
    for (std::size_t i = 0; i < ts.num_states(); ++i) {
        CHECK(shifted.states[i].tau == doctest::Approx(ts.states[i].tau + 3.5));
        CHECK(shifted.states[i].px == ts.states[i].px);
    }

    // A pure rotation of a straight primitive is a rotated straight primitive.
    VehicleParams veh;
    State5 x0{0, 0, 0, 10, 0};
    std::vector<ControlSegment> u{{{0, 0}, 1.0}};
    TransitionSystem straight;
    straight.states = {x0};
    auto tr = integrate_bicycle(x0, u, 0.01, 1.0, veh);
    straight.states.push_back(tr.samples.back());
    straight.edges = {{0, 1}};
    straight.costs = {1.0};
    straight.trajectories = {tr};
    straight.controls = {u};
    auto rotated = translate_system(straight, {0, 0, kPi / 2, 0});
    CHECK(rotated.states[1].px == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rotated.states[1].py == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("edge_cost: duration default and pluggable integrands") {
    VehicleParams veh;
    State5 x0{0, 0, 0, 10, 0};
    std::vector<ControlSegment> coast{{{0, 0}, 1.0}};
    auto tr1 = integrate_bicycle(x0, coast, 0.01, 1.0, veh);
    CHECK(edge_cost(tr1) == doctest::Approx(1.0));

    std::vector<ControlSegment> two{{{0, 0}, 2.0}};
    auto tr2 = integrate_bicycle(x0, two, 0.01, 2.0, veh);
    CHECK(edge_cost(tr2, [](const State5& s) { return s.speed; }) == doctest::Approx(20.0));

    // accelerating profile, g = v^2: integral of (v0 + a t)^2
    State5 x3{0, 0, 0, 2, 0};
    std::vector<ControlSegment> acc{{{0, 1.0}, 2.0}};
    auto tr3 = integrate_bicycle(x3, acc, 0.01, 2.0, veh);
    const double analytic = (std::pow(2 + 2.0, 3) - std::pow(2.0, 3)) / 3.0;
    CHECK(std::abs(edge_cost(tr3, [](const State5& s) { return s.speed * s.speed; }) - analytic) <
          1e-3);
}

TEST_CASE("finite traces concatenate to a continuous trajectory") {
    auto cfg = small_config();
    cfg.target_edges = 60;
    auto ts = build_abstraction(cfg, 21);
    // follow any outgoing edge chain from state 0
    std::uint32_t current = 0;
    int hops = 0;
    const Trajectory* prev = nullptr;
    while (hops < 5) {
        std::int64_t next_edge = -1;
        for (std::size_t e = 0; e < ts.num_edges(); ++e) {
            if (ts.edges[e].from == current) {
                next_edge = static_cast<std::int64_t>(e);
                break;
            }
        }
        if (next_edge < 0) break;
        const auto& tr = ts.trajectories[static_cast<std::size_t>(next_edge)];
        if (prev) CHECK(state_distance(prev->back(), tr.front()) <= cfg.eps_end);
        prev = &tr;
        current = ts.edges[static_cast<std::size_t>(next_edge)].to;
        ++hops;
    }
    CHECK(hops >= 1);
}

TEST_CASE("transition system file round trip") {
    auto cfg = small_config();
    cfg.target_edges = 30;
    auto ts = build_abstraction(cfg, 5);
    const auto path = std::filesystem::temp_directory_path() / "ltlgrid_test_system.ltsb";
    save_transition_system(path, ts);
    auto loaded = load_transition_system(path);
    REQUIRE(loaded.num_states() == ts.num_states());
    REQUIRE(loaded.num_edges() == ts.num_edges());
    for (std::size_t i = 0; i < ts.num_states(); ++i) {
        CHECK(state_distance(loaded.states[i], ts.states[i]) == 0.0);
    }
    for (std::size_t e = 0; e < ts.num_edges(); ++e) {
        CHECK(loaded.costs[e] == ts.costs[e]);
        CHECK(loaded.edges[e].from == ts.edges[e].from);
        CHECK(loaded.trajectories[e].samples.size() == ts.trajectories[e].samples.size());
        CHECK(loaded.controls[e].size() == ts.controls[e].size());
    }
    std::filesystem::remove(path);
}

TEST_CASE("abstraction config json round trip") {
    AbstractionConfig cfg;
    cfg.target_edges = 1234;
    cfg.region = SampleRegion::Loop;
    cfg.loop_radius = 17.5;
    auto back = AbstractionConfig::from_json(cfg.to_json());
    CHECK(back.target_edges == 1234);
    CHECK(back.region == SampleRegion::Loop);
    CHECK(back.loop_radius == 17.5);
    CHECK(back.step == cfg.step);
}
