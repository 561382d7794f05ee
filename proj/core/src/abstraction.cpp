#include "ltlgrid/abstraction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "ltlgrid/rng.hpp"

namespace ltlgrid {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double wrap_angle(double a) {
    double w = std::fmod(a + kPi, 2 * kPi);
    if (w <= 0) w += 2 * kPi;
    return w - kPi;
}

std::array<std::array<double, 2>, 4> OrientedRect::corners() const {
    const double lx = half_length * cos_h;
    const double ly = half_length * sin_h;
    const double wx = -half_width * sin_h;
    const double wy = half_width * cos_h;
    return {{{cx + lx + wx, cy + ly + wy},
             {cx + lx - wx, cy + ly - wy},
             {cx - lx - wx, cy - ly - wy},
             {cx - lx + wx, cy - ly + wy}}};
}

// ---------------------------------------------------------------------------
// Bicycle model integration
// ---------------------------------------------------------------------------

namespace {

struct Deriv {
    double px, py, heading, speed;
};

Deriv bicycle_rhs(const State5& x, const ControlInput& u, double wheelbase) {
    return {x.speed * std::cos(x.heading + u.steer),
            x.speed * std::sin(x.heading + u.steer),
            x.speed / wheelbase * std::sin(u.steer),
            u.accel};
}

State5 advance(const State5& x, const Deriv& d, double h) {
    return {x.px + h * d.px, x.py + h * d.py, x.heading + h * d.heading,
            x.speed + h * d.speed, x.tau};
}

State5 rk4_step(const State5& x, const ControlInput& u, double h, double wheelbase) {
    Deriv k1 = bicycle_rhs(x, u, wheelbase);
    Deriv k2 = bicycle_rhs(advance(x, k1, h / 2), u, wheelbase);
    Deriv k3 = bicycle_rhs(advance(x, k2, h / 2), u, wheelbase);
    Deriv k4 = bicycle_rhs(advance(x, k3, h), u, wheelbase);
    State5 out;
    out.px = x.px + h / 6 * (k1.px + 2 * k2.px + 2 * k3.px + k4.px);
    out.py = x.py + h / 6 * (k1.py + 2 * k2.py + 2 * k3.py + k4.py);
    out.heading = x.heading + h / 6 * (k1.heading + 2 * k2.heading + 2 * k3.heading + k4.heading);
    out.speed = x.speed + h / 6 * (k1.speed + 2 * k2.speed + 2 * k3.speed + k4.speed);
    out.tau = x.tau;
    return out;
}

std::int64_t steps_of(double duration, double step) {
    const double q = duration / step;
    const auto n = static_cast<std::int64_t>(std::llround(q));
    if (n < 0 || std::abs(q - static_cast<double>(n)) > 1e-9) {
        throw std::invalid_argument("duration must be a multiple of the step");
    }
    return n;
}

}  // namespace

Trajectory integrate_bicycle(const State5& start, std::span<const ControlSegment> schedule,
                             double step, double duration, const VehicleParams& vehicle) {
    if (step <= 0) throw std::invalid_argument("step must be positive");
    if (vehicle.wheelbase <= 0) throw std::invalid_argument("wheelbase must be positive");
    const std::int64_t total_steps = steps_of(duration, step);

    double scheduled = 0;
    for (const auto& seg : schedule) {
        if (std::abs(seg.input.steer) > vehicle.max_steer + 1e-12 ||
            std::abs(seg.input.accel) > vehicle.max_accel + 1e-12) {
            throw std::domain_error("control outside configured bounds");
        }
        steps_of(seg.duration, step);  // boundaries must align with the step
        scheduled += seg.duration;
    }
    if (scheduled + 1e-9 < duration) {
        throw std::invalid_argument("control schedule shorter than duration");
    }

    Trajectory tr;
    tr.step = step;
    tr.samples.reserve(static_cast<std::size_t>(total_steps) + 1);
    State5 x = start;
    x.heading = wrap_angle(x.heading);
    tr.samples.push_back(x);

    std::size_t seg_idx = 0;
    std::int64_t seg_remaining =
        schedule.empty() ? 0 : steps_of(schedule[0].duration, step);
    for (std::int64_t i = 0; i < total_steps; ++i) {
        while (seg_remaining == 0) {
            ++seg_idx;
            if (seg_idx >= schedule.size()) {
                throw std::invalid_argument("control schedule shorter than duration");
            }
            seg_remaining = steps_of(schedule[seg_idx].duration, step);
        }
        x = rk4_step(x, schedule[seg_idx].input, step, vehicle.wheelbase);
        --seg_remaining;
        x.tau = start.tau + static_cast<double>(i + 1) * step;
        if (!vehicle.allow_reverse && x.speed < -1e-9) {
            throw std::domain_error("speed became negative during integration");
        }
        State5 stored = x;
        stored.heading = wrap_angle(stored.heading);
        tr.samples.push_back(stored);
    }
    return tr;
}

OrientedRect footprint_polygon(const State5& x, const FootprintSpec& f) {
    if (f.length <= 0 || f.width <= 0) throw std::invalid_argument("footprint must be positive");
    OrientedRect r;
    r.cos_h = std::cos(x.heading);
    r.sin_h = std::sin(x.heading);
    r.cx = x.px + f.ref_offset * r.cos_h;
    r.cy = x.py + f.ref_offset * r.sin_h;
    r.half_length = f.length / 2;
    r.half_width = f.width / 2;
    return r;
}

// ---------------------------------------------------------------------------
// Swept-volume voxelization
// ---------------------------------------------------------------------------

namespace {

// Positive-measure overlap between an axis-aligned cell and an oriented
// rectangle: strict separating-axis test on the four candidate axes.
bool rect_cell_overlap(const OrientedRect& r, double cell_cx, double cell_cy, double half_x,
                       double half_y) {
    const double dx = cell_cx - r.cx;
    const double dy = cell_cy - r.cy;
    const double ac = std::abs(r.cos_h);
    const double as = std::abs(r.sin_h);
    if (std::abs(dx) >= half_x + r.half_length * ac + r.half_width * as) return false;
    if (std::abs(dy) >= half_y + r.half_length * as + r.half_width * ac) return false;
    if (std::abs(dx * r.cos_h + dy * r.sin_h) >=
        r.half_length + half_x * ac + half_y * as) return false;
    if (std::abs(-dx * r.sin_h + dy * r.cos_h) >=
        r.half_width + half_x * as + half_y * ac) return false;
    return true;
}

void sweep_collect(const Trajectory& tr, const FootprintSpec& f, const GridSpec& g,
                   std::vector<std::uint64_t>& out) {
    if (g.dims() != 3) {
        throw std::invalid_argument("sweep_voxelize requires a 3-d (x, y, tau) grid");
    }
    const ZScatter scatter(g);
    const double half_x = g.cell_width(0) / 2;
    const double half_y = g.cell_width(1) / 2;
    for (const State5& s : tr.samples) {
        if (!(s.tau >= g.lower(2) && s.tau < g.upper(2))) {
            throw std::domain_error("trajectory exits workspace (time axis)");
        }
        const std::uint64_t ct_bits = scatter.scatter(2, g.quantize(2, s.tau));
        const OrientedRect rect = footprint_polygon(s, f);
        const double ext_x = rect.half_length * std::abs(rect.cos_h) +
                             rect.half_width * std::abs(rect.sin_h);
        const double ext_y = rect.half_length * std::abs(rect.sin_h) +
                             rect.half_width * std::abs(rect.cos_h);
        if (rect.cx - ext_x < g.lower(0) || rect.cx + ext_x > g.upper(0) ||
            rect.cy - ext_y < g.lower(1) || rect.cy + ext_y > g.upper(1)) {
            throw std::domain_error("trajectory exits workspace (position)");
        }
        auto [x0, x1] = g.overlap_cells(0, rect.cx - ext_x, rect.cx + ext_x);
        auto [y0, y1] = g.overlap_cells(1, rect.cy - ext_y, rect.cy + ext_y);
        const double wx = g.cell_width(0);
        const double wy = g.cell_width(1);
        for (std::int64_t cx = x0; cx <= x1; ++cx) {
            const double ccx = g.lower(0) + (static_cast<double>(cx) + 0.5) * wx;
            const std::uint64_t x_bits = scatter.scatter(0, static_cast<std::uint64_t>(cx));
            for (std::int64_t cy = y0; cy <= y1; ++cy) {
                const double ccy = g.lower(1) + (static_cast<double>(cy) + 0.5) * wy;
                if (!rect_cell_overlap(rect, ccx, ccy, half_x, half_y)) continue;
                out.push_back(x_bits | scatter.scatter(1, static_cast<std::uint64_t>(cy)) |
                              ct_bits);
            }
        }
    }
}

}  // namespace

void sweep_voxelize_indices(const Trajectory& tr, const FootprintSpec& f, const GridSpec& g,
                            std::vector<std::uint64_t>& out) {
    const std::size_t base = out.size();
    sweep_collect(tr, f, g, out);
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(base), out.end());
    out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(base), out.end()),
              out.end());
}

OccupancyBitset sweep_voxelize(const Trajectory& tr, const FootprintSpec& f, const GridSpec& g) {
    std::vector<std::uint64_t> cells;
    sweep_collect(tr, f, g, cells);
    OccupancyBitset bits = OccupancyBitset::for_grid(g);
    for (std::uint64_t c : cells) bits.set(c);
    return bits;
}

// ---------------------------------------------------------------------------
// TransitionSystem
// ---------------------------------------------------------------------------

std::int64_t TransitionSystem::find_edge(std::uint32_t from, std::uint32_t to) const {
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].from == from && edges[i].to == to) return static_cast<std::int64_t>(i);
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Roadmap construction
// ---------------------------------------------------------------------------

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1) {
        out.push_back((lo + hi) / 2);
        return out;
    }
    for (int i = 0; i < n; ++i) {
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

using MergeKey = std::array<std::int64_t, 5>;

MergeKey merge_key(const State5& s, double eps) {
    auto q = [eps](double v) { return static_cast<std::int64_t>(std::llround(v / eps)); };
    return {q(s.px), q(s.py), q(s.heading), q(s.speed), q(s.tau)};
}

State5 sample_root(const AbstractionConfig& cfg, SplitMix64& rng) {
    State5 s;
    if (cfg.region == SampleRegion::Loop) {
        const double angle = rng.uniform(0, 2 * kPi);
        const double radius = cfg.loop_radius + rng.uniform(-cfg.radial_spread, cfg.radial_spread);
        s.px = cfg.loop_cx + radius * std::cos(angle);
        s.py = cfg.loop_cy + radius * std::sin(angle);
        s.heading = wrap_angle(angle + kPi / 2 +
                               rng.uniform(-cfg.heading_spread, cfg.heading_spread));
    } else {
        s.px = rng.uniform(cfg.x_min + cfg.margin, cfg.x_max - cfg.margin);
        s.py = rng.uniform(cfg.y_min + cfg.margin, cfg.y_max - cfg.margin);
        s.heading = wrap_angle(rng.uniform(-kPi, kPi));
    }
    s.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    s.tau = rng.uniform(cfg.tau_min, cfg.tau_max);
    return s;
}

bool trajectory_in_bounds(const Trajectory& tr, const AbstractionConfig& cfg) {
    const double x0 = cfg.x_min + cfg.margin;
    const double x1 = cfg.x_max - cfg.margin;
    const double y0 = cfg.y_min + cfg.margin;
    const double y1 = cfg.y_max - cfg.margin;
    for (const State5& s : tr.samples) {
        if (s.px < x0 || s.px > x1 || s.py < y0 || s.py > y1) return false;
        if (s.tau > cfg.tau_limit) return false;
        if (s.speed < 0) return false;
    }
    return true;
}

}  // namespace

TransitionSystem build_abstraction(const AbstractionConfig& cfg, std::uint64_t seed) {
    if (cfg.fan_size <= 0 || cfg.fan_size > cfg.steer_count * cfg.accel_count) {
        throw std::invalid_argument("fan_size must fit the control grid");
    }
    if (!(cfg.speed_min <= cfg.speed_max) || cfg.speed_min < 0) {
        throw std::invalid_argument("invalid speed range");
    }
    if (cfg.x_max - cfg.x_min <= 2 * cfg.margin || cfg.y_max - cfg.y_min <= 2 * cfg.margin) {
        throw std::invalid_argument("sampling region smaller than its margin");
    }

    // Primitive fan: coast/straight controls first, deterministic order.
    std::vector<ControlInput> fan;
    for (double a : linspace(-cfg.accel_max, cfg.accel_max, cfg.accel_count)) {
        for (double d : linspace(-cfg.steer_max, cfg.steer_max, cfg.steer_count)) {
            fan.push_back({d, a});
        }
    }
    std::sort(fan.begin(), fan.end(), [](const ControlInput& a, const ControlInput& b) {
        return std::make_tuple(std::abs(a.accel), std::abs(a.steer), a.accel, a.steer) <
               std::make_tuple(std::abs(b.accel), std::abs(b.steer), b.accel, b.steer);
    });
    fan.resize(static_cast<std::size_t>(cfg.fan_size));

    SplitMix64 rng(seed);
    TransitionSystem ts;
    std::map<MergeKey, std::uint32_t> index;
    std::deque<std::uint32_t> queue;

    auto add_state = [&](const State5& s) {
        auto key = merge_key(s, cfg.eps_end);
        auto it = index.find(key);
        if (it != index.end()) return std::make_pair(it->second, false);
        auto id = static_cast<std::uint32_t>(ts.states.size());
        ts.states.push_back(s);
        index.emplace(key, id);
        return std::make_pair(id, true);
    };

    auto done = [&] {
        if (cfg.target_edges) return ts.num_edges() >= cfg.target_edges;
        return ts.num_states() >= cfg.vertex_budget;
    };

    int root_attempts = 0;
    const int max_root_attempts = std::max(cfg.root_count * 16, 1024);
    for (int i = 0; i < cfg.root_count; ++i) {
        auto [id, fresh] = add_state(sample_root(cfg, rng));
        if (fresh) queue.push_back(id);
    }

    while (!done()) {
        if (queue.empty()) {
            if (++root_attempts > max_root_attempts) break;
            auto [id, fresh] = add_state(sample_root(cfg, rng));
            if (fresh) queue.push_back(id);
            continue;
        }
        const std::uint32_t v = queue.front();
        queue.pop_front();
        const State5 start = ts.states[v];
        for (const ControlInput& u : fan) {
            if (done()) break;
            std::vector<ControlSegment> schedule{{u, cfg.primitive_duration}};
            Trajectory tr;
            try {
                tr = integrate_bicycle(start, schedule, cfg.step, cfg.primitive_duration,
                                       cfg.vehicle);
            } catch (const std::domain_error&) {
                continue;  // e.g. speed went negative
            }
            if (!trajectory_in_bounds(tr, cfg)) continue;
            if (cfg.target_edges == 0 && ts.num_states() >= cfg.vertex_budget &&
                index.find(merge_key(tr.back(), cfg.eps_end)) == index.end()) {
                continue;  // vertex budget reached, edge would need a new state
            }
            auto [to, fresh] = add_state(tr.back());
            if (fresh) queue.push_back(to);
            ts.edges.push_back({v, to});
            ts.costs.push_back(edge_cost(tr));
            ts.trajectories.push_back(std::move(tr));
            ts.controls.push_back(std::move(schedule));
        }
    }

    if (ts.num_edges() == 0) {
        throw std::runtime_error("build_abstraction: no feasible edges for this configuration");
    }
    if (cfg.target_edges && ts.num_edges() < cfg.target_edges) {
        throw std::runtime_error("build_abstraction: could not reach the requested edge count");
    }
    return ts;
}

TransitionSystem translate_system(const TransitionSystem& s, const Translation2& delta) {
    const double c = std::cos(delta.d_heading);
    const double sn = std::sin(delta.d_heading);
    auto shift = [&](const State5& x) {
        State5 out;
        out.px = c * x.px - sn * x.py + delta.dx;
        out.py = sn * x.px + c * x.py + delta.dy;
        out.heading = wrap_angle(x.heading + delta.d_heading);
        out.speed = x.speed;
        out.tau = x.tau + delta.dt;
        return out;
    };
    TransitionSystem out;
    out.states.reserve(s.states.size());
    for (const auto& x : s.states) out.states.push_back(shift(x));
    out.edges = s.edges;
    out.costs = s.costs;
    out.controls = s.controls;
    out.trajectories.reserve(s.trajectories.size());
    for (const auto& tr : s.trajectories) {
        Trajectory t;
        t.step = tr.step;
        t.samples.reserve(tr.samples.size());
        for (const auto& x : tr.samples) t.samples.push_back(shift(x));
        out.trajectories.push_back(std::move(t));
    }
    return out;
}

double edge_cost(const Trajectory& tr) { return tr.duration(); }

double edge_cost(const Trajectory& tr, const std::function<double(const State5&)>& g) {
    if (tr.samples.size() < 2) return 0;
    double sum = 0;
    for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
        sum += (g(tr.samples[i]) + g(tr.samples[i + 1])) / 2;
    }
    return sum * tr.step;
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

std::string AbstractionConfig::to_json() const {
    nlohmann::json j;
    j["target_edges"] = target_edges;
    j["vertex_budget"] = vertex_budget;
    j["fan_size"] = fan_size;
    j["root_count"] = root_count;
    j["steer_count"] = steer_count;
    j["steer_max"] = steer_max;
    j["accel_count"] = accel_count;
    j["accel_max"] = accel_max;
    j["primitive_duration"] = primitive_duration;
    j["step"] = step;
    j["region"] = region == SampleRegion::Loop ? "loop" : "rect";
    j["x_min"] = x_min;
    j["x_max"] = x_max;
    j["y_min"] = y_min;
    j["y_max"] = y_max;
    j["speed_min"] = speed_min;
    j["speed_max"] = speed_max;
    j["tau_min"] = tau_min;
    j["tau_max"] = tau_max;
    j["tau_limit"] = tau_limit;
    j["margin"] = margin;
    j["loop_cx"] = loop_cx;
    j["loop_cy"] = loop_cy;
    j["loop_radius"] = loop_radius;
    j["radial_spread"] = radial_spread;
    j["heading_spread"] = heading_spread;
    j["wheelbase"] = vehicle.wheelbase;
    j["max_steer"] = vehicle.max_steer;
    j["max_accel"] = vehicle.max_accel;
    j["footprint_length"] = footprint.length;
    j["footprint_width"] = footprint.width;
    j["footprint_ref_offset"] = footprint.ref_offset;
    j["eps_end"] = eps_end;
    return j.dump(2);
}

AbstractionConfig AbstractionConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    AbstractionConfig c;
    c.target_edges = j.value("target_edges", c.target_edges);
    c.vertex_budget = j.value("vertex_budget", c.vertex_budget);
    c.fan_size = j.value("fan_size", c.fan_size);
    c.root_count = j.value("root_count", c.root_count);
    c.steer_count = j.value("steer_count", c.steer_count);
    c.steer_max = j.value("steer_max", c.steer_max);
    c.accel_count = j.value("accel_count", c.accel_count);
    c.accel_max = j.value("accel_max", c.accel_max);
    c.primitive_duration = j.value("primitive_duration", c.primitive_duration);
    c.step = j.value("step", c.step);
    if (j.contains("region")) {
        const auto r = j["region"].get<std::string>();
        if (r == "loop") c.region = SampleRegion::Loop;
        else if (r == "rect") c.region = SampleRegion::Rect;
        else throw std::invalid_argument("unknown sampling region: " + r);
    }
    c.x_min = j.value("x_min", c.x_min);
    c.x_max = j.value("x_max", c.x_max);
    c.y_min = j.value("y_min", c.y_min);
    c.y_max = j.value("y_max", c.y_max);
    c.speed_min = j.value("speed_min", c.speed_min);
    c.speed_max = j.value("speed_max", c.speed_max);
    c.tau_min = j.value("tau_min", c.tau_min);
    c.tau_max = j.value("tau_max", c.tau_max);
    c.tau_limit = j.value("tau_limit", c.tau_limit);
    c.margin = j.value("margin", c.margin);
    c.loop_cx = j.value("loop_cx", c.loop_cx);
    c.loop_cy = j.value("loop_cy", c.loop_cy);
    c.loop_radius = j.value("loop_radius", c.loop_radius);
    c.radial_spread = j.value("radial_spread", c.radial_spread);
    c.heading_spread = j.value("heading_spread", c.heading_spread);
    c.vehicle.wheelbase = j.value("wheelbase", c.vehicle.wheelbase);
    c.vehicle.max_steer = j.value("max_steer", c.vehicle.max_steer);
    c.vehicle.max_accel = j.value("max_accel", c.vehicle.max_accel);
    c.footprint.length = j.value("footprint_length", c.footprint.length);
    c.footprint.width = j.value("footprint_width", c.footprint.width);
    c.footprint.ref_offset = j.value("footprint_ref_offset", c.footprint.ref_offset);
    c.eps_end = j.value("eps_end", c.eps_end);
    return c;
}

// ---------------------------------------------------------------------------
// Transition system file format
// ---------------------------------------------------------------------------

namespace {

constexpr char kSystemMagic[4] = {'L', 'T', 'S', 'B'};
constexpr std::uint32_t kSystemVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void put_state(std::ostream& os, const State5& s) {
    put_f64(os, s.px);
    put_f64(os, s.py);
    put_f64(os, s.heading);
    put_f64(os, s.speed);
    put_f64(os, s.tau);
}

State5 get_state(std::istream& is) {
    State5 s;
    s.px = get_f64(is);
    s.py = get_f64(is);
    s.heading = get_f64(is);
    s.speed = get_f64(is);
    s.tau = get_f64(is);
    return s;
}

}  // namespace

void save_transition_system(const std::filesystem::path& path, const TransitionSystem& s) {
    const std::size_t m = s.num_edges();
    if (s.trajectories.size() != m || s.costs.size() != m || s.controls.size() != m) {
        throw std::invalid_argument("transition system arrays are inconsistent");
    }
    std::uint64_t total_samples = 0;
    std::uint64_t total_segments = 0;
    for (const auto& tr : s.trajectories) total_samples += tr.samples.size();
    for (const auto& cs : s.controls) total_segments += cs.size();

    nlohmann::json header;
    header["states"] = s.num_states();
    header["edges"] = m;
    header["total_samples"] = total_samples;
    header["total_segments"] = total_segments;
    const std::string header_text = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(kSystemMagic, 4);
    put_u32(os, kSystemVersion);
    put_u64(os, header_text.size());
    os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    for (const auto& st : s.states) put_state(os, st);
    for (const auto& e : s.edges) {
        put_u32(os, e.from);
        put_u32(os, e.to);
    }
    for (double c : s.costs) put_f64(os, c);
    for (const auto& tr : s.trajectories) {
        put_u32(os, static_cast<std::uint32_t>(tr.samples.size()));
        put_f64(os, tr.step);
    }
    for (const auto& tr : s.trajectories) {
        for (const auto& st : tr.samples) put_state(os, st);
    }
    for (const auto& cs : s.controls) {
        put_u32(os, static_cast<std::uint32_t>(cs.size()));
        for (const auto& seg : cs) {
            put_f64(os, seg.input.steer);
            put_f64(os, seg.input.accel);
            put_f64(os, seg.duration);
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

TransitionSystem load_transition_system(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kSystemMagic, 4) != 0) {
        throw std::runtime_error("not a transition system file: " + path.string());
    }
    const std::uint32_t version = get_u32(is);
    if (version != kSystemVersion) {
        throw std::runtime_error("unsupported transition system version");
    }
    const std::uint64_t header_len = get_u64(is);
    std::string header_text(header_len, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(header_len));
    nlohmann::json header = nlohmann::json::parse(header_text);
    const auto n = header.at("states").get<std::uint64_t>();
    const auto m = header.at("edges").get<std::uint64_t>();

    TransitionSystem s;
    s.states.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) s.states.push_back(get_state(is));
    s.edges.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        TransitionSystem::Edge e;
        e.from = get_u32(is);
        e.to = get_u32(is);
        if (e.from >= n || e.to >= n) throw std::runtime_error("corrupt edge endpoint");
        s.edges.push_back(e);
    }
    s.costs.resize(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        s.costs[i] = get_f64(is);
        if (!(s.costs[i] >= 0)) throw std::runtime_error("negative edge cost in file");
    }
    std::vector<std::uint32_t> counts(m);
    std::vector<double> steps(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        counts[i] = get_u32(is);
        steps[i] = get_f64(is);
    }
    s.trajectories.resize(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        s.trajectories[i].step = steps[i];
        s.trajectories[i].samples.reserve(counts[i]);
        for (std::uint32_t k = 0; k < counts[i]; ++k) {
            s.trajectories[i].samples.push_back(get_state(is));
        }
    }
    s.controls.resize(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint32_t segs = get_u32(is);
        s.controls[i].reserve(segs);
        for (std::uint32_t k = 0; k < segs; ++k) {
            ControlSegment seg;
            seg.input.steer = get_f64(is);
            seg.input.accel = get_f64(is);
            seg.duration = get_f64(is);
            s.controls[i].push_back(seg);
        }
    }
    if (!is) throw std::runtime_error("truncated transition system file: " + path.string());
    return s;
}

}  // namespace ltlgrid
