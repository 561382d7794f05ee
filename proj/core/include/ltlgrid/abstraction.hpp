#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ltlgrid/grid.hpp"

namespace ltlgrid {

/// Vehicle state: planar position (m), heading (rad, wrapped to (-pi, pi]),
/// longitudinal speed (m/s), and clock state tau (s).
struct State5 {
    double px = 0;
    double py = 0;
    double heading = 0;
    double speed = 0;
    double tau = 0;
};

struct ControlInput {
    double steer = 0;  // rad
    double accel = 0;  // m/s^2
};

/// Piecewise-constant control: `input` held for `duration` seconds.
struct ControlSegment {
    ControlInput input;
    double duration = 0;
};

struct VehicleParams {
    double wheelbase = 2.7;
    double max_steer = 0.5;
    double max_accel = 3.0;
    bool allow_reverse = false;
};

/// States sampled at a fixed step; duration = (samples-1) * step.
struct Trajectory {
    std::vector<State5> samples;
    double step = 0;

    double duration() const {
        return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) * step;
    }
    const State5& front() const { return samples.front(); }
    const State5& back() const { return samples.back(); }
};

/// Rectangular top-down footprint. The reference point (px, py) sits
/// `ref_offset` metres behind the rectangle centre along the heading, i.e.
/// centre = position + ref_offset * heading direction.
struct FootprintSpec {
    double length = 4.6;
    double width = 2.0;
    double ref_offset = -1.4;
};

struct OrientedRect {
    double cx = 0;
    double cy = 0;
    double half_length = 0;
    double half_width = 0;
    double cos_h = 1;
    double sin_h = 0;

    std::array<std::array<double, 2>, 4> corners() const;
};

double wrap_angle(double a);

/// Fixed-step classical Runge-Kutta integration of the single-track bicycle
/// model; tau advances exactly with time. The schedule's total duration must
/// cover `duration` and segment boundaries must align with the step.
Trajectory integrate_bicycle(const State5& start, std::span<const ControlSegment> schedule,
                             double step, double duration, const VehicleParams& vehicle);

OrientedRect footprint_polygon(const State5& x, const FootprintSpec& f);

/// Conservative voxelization of the footprint swept along a trajectory in
/// the 3-d (x, y, tau) workspace: each sample's rectangle is rasterized into
/// the time slab containing the sample's tau.
OccupancyBitset sweep_voxelize(const Trajectory& tr, const FootprintSpec& f, const GridSpec& g);

/// sweep_voxelize as sorted unique cell indices, appended to out.
void sweep_voxelize_indices(const Trajectory& tr, const FootprintSpec& f, const GridSpec& g,
                            std::vector<std::uint64_t>& out);

/// Weighted labeled graph of feasible motions. Each edge stores its
/// trajectory, the controls that generated it, and a nonnegative cost.
struct TransitionSystem {
    struct Edge {
        std::uint32_t from = 0;
        std::uint32_t to = 0;
    };

    std::vector<State5> states;
    std::vector<Edge> edges;
    std::vector<Trajectory> trajectories;          // one per edge
    std::vector<std::vector<ControlSegment>> controls;  // one per edge
    std::vector<double> costs;                     // one per edge

    std::size_t num_states() const { return states.size(); }
    std::size_t num_edges() const { return edges.size(); }

    /// Edge index for (from, to); -1 when absent.
    std::int64_t find_edge(std::uint32_t from, std::uint32_t to) const;
};

/// How root states are sampled.
enum class SampleRegion {
    Rect,  // uniform over the position box with uniform heading
    Loop,  // on an annulus around a loop centre, heading near the tangent
};

struct AbstractionConfig {
    // Graph shape. Expansion stops at target_edges when nonzero, otherwise
    // when vertex_budget states exist.
    std::uint64_t target_edges = 0;
    std::uint32_t vertex_budget = 256;
    int fan_size = 9;  // motion primitives expanded per state
    int root_count = 4;

    // Motion primitive grid.
    int steer_count = 3;
    double steer_max = 0.25;
    int accel_count = 3;
    double accel_max = 1.5;
    double primitive_duration = 0.5;
    double step = 0.0125;

    // Sampling region (also the clip box for trajectories, shrunk by margin).
    SampleRegion region = SampleRegion::Rect;
    double x_min = 0, x_max = 72;
    double y_min = 0, y_max = 72;
    double speed_min = 8, speed_max = 14;
    double tau_min = 0, tau_max = 0;  // root tau range
    double tau_limit = 7.2;           // edges ending beyond this are dropped
    double margin = 3.0;

    // Loop sampling parameters (region == Loop).
    double loop_cx = 36, loop_cy = 36;
    double loop_radius = 24;
    double radial_spread = 6;
    double heading_spread = 0.4;

    VehicleParams vehicle;
    FootprintSpec footprint;

    // Endpoint merge tolerance, max-norm over (m, m, rad, m/s, s).
    double eps_end = 1e-3;

    std::string to_json() const;
    static AbstractionConfig from_json(const std::string& text);
};

/// Deterministically expands motion-primitive fans from sampled root states.
/// Every edge is a forward-integrated bicycle trajectory; endpoints within
/// eps_end of an existing state merge into it.
TransitionSystem build_abstraction(const AbstractionConfig& cfg, std::uint64_t seed);

/// Rigid shift of the whole system: positions rotate by d_heading about the
/// origin and translate by (dx, dy); headings shift by d_heading and tau by
/// dt. Dynamic feasibility is preserved.
struct Translation2 {
    double dx = 0;
    double dy = 0;
    double d_heading = 0;
    double dt = 0;
};
TransitionSystem translate_system(const TransitionSystem& s, const Translation2& delta);

/// Edge cost with the default unit running cost: exactly the duration.
double edge_cost(const Trajectory& tr);

/// Edge cost for a state-dependent running cost, trapezoidal rule.
double edge_cost(const Trajectory& tr, const std::function<double(const State5&)>& g);

/// Versioned container file: JSON header plus binary blocks for states,
/// edges, controls, trajectory samples, and costs.
void save_transition_system(const std::filesystem::path& path, const TransitionSystem& s);
TransitionSystem load_transition_system(const std::filesystem::path& path);

}  // namespace ltlgrid
