#include "ltlgrid/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ltlgrid/rng.hpp"

namespace ltlgrid {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr const char* kMovingVehicle = "moving_vehicle";
constexpr const char* kNotNominalLane = "not_nominal_lane";
}  // namespace

GridSpec default_bench_grid(int depth) {
    return GridSpec({{0.0, 72.0}, {0.0, 72.0}, {0.0, 7.2}}, depth);
}

AbstractionConfig loop_abstraction_config(const ScenarioConfig& cfg, const GridSpec& grid,
                                          std::uint64_t target_edges) {
    if (grid.dims() != 3) throw std::invalid_argument("loop abstraction needs a 3-d grid");
    AbstractionConfig a;
    a.target_edges = target_edges;
    a.region = SampleRegion::Loop;
    a.loop_cx = cfg.loop_cx;
    a.loop_cy = cfg.loop_cy;
    a.loop_radius = cfg.loop_radius;
    a.radial_spread = 1.5;
    a.heading_spread = 0.25;
    a.root_count = std::max<int>(4, static_cast<int>(target_edges / 2048));
    a.x_min = grid.lower(0);
    a.x_max = grid.upper(0);
    a.y_min = grid.lower(1);
    a.y_max = grid.upper(1);
    a.speed_min = 8;
    a.speed_max = 14;
    a.tau_min = grid.lower(2);
    a.tau_max = std::max(grid.lower(2), grid.upper(2) - 2 * a.primitive_duration);
    a.tau_limit = grid.upper(2) - 1e-9;
    return a;
}

// ---------------------------------------------------------------------------
// Scenario volumes
// ---------------------------------------------------------------------------

ScenarioVolumes generate_scenario(const ScenarioConfig& cfg, const GridSpec& grid,
                                  std::uint64_t query_index) {
    if (grid.dims() != 3) throw std::invalid_argument("scenario needs a 3-d (x, y, tau) grid");
    if (cfg.horizon > grid.upper(2) - grid.lower(2) + 1e-9) {
        throw std::invalid_argument("horizon exceeds the grid's tau extent");
    }
    const ZScatter scatter(grid);
    ScenarioVolumes out{OccupancyBitset::for_grid(grid), OccupancyBitset::for_grid(grid)};

    // not_nominal_lane: everything outside the circular lane tube, at every
    // time slab (the lane is static).
    const std::uint64_t nx = grid.axis_cells(0);
    const std::uint64_t ny = grid.axis_cells(1);
    const std::uint64_t nt = grid.axis_cells(2);
    const double half_lane = cfg.lane_width / 2;
    for (std::uint64_t cx = 0; cx < nx; ++cx) {
        const double x = grid.lower(0) + (static_cast<double>(cx) + 0.5) * grid.cell_width(0);
        for (std::uint64_t cy = 0; cy < ny; ++cy) {
            const double y = grid.lower(1) + (static_cast<double>(cy) + 0.5) * grid.cell_width(1);
            const double r = std::hypot(x - cfg.loop_cx, y - cfg.loop_cy);
            if (std::abs(r - cfg.loop_radius) <= half_lane) continue;  // nominal lane
            const std::uint64_t base = scatter.scatter(0, cx) | scatter.scatter(1, cy);
            for (std::uint64_t ct = 0; ct < nt; ++ct) {
                out.not_nominal_lane.set(base | scatter.scatter(2, ct));
            }
        }
    }

    // moving_vehicle: anticipated swept boxes of the other agents, one
    // axis-aligned box per agent per time slab.
    SplitMix64 rng(mix_seed(cfg.seed, query_index));
    const double w_tau = grid.cell_width(2);
    std::vector<std::uint64_t> indices;
    for (int agent = 0; agent < cfg.agent_count; ++agent) {
        const double angle0 = rng.uniform(0, 2 * kPi);
        const double direction = rng.uniform() < 0.5 ? 1.0 : -1.0;
        const double speed = rng.uniform(cfg.agent_speed_min, cfg.agent_speed_max);
        const double radius = cfg.loop_radius + rng.uniform(-cfg.lateral_spread, cfg.lateral_spread);
        if (radius <= 1.0) throw std::domain_error("agent radius collapsed to the loop centre");
        const double omega = direction * speed / radius;

        auto agent_extent = [&](double tau, double& x_lo, double& x_hi, double& y_lo,
                                double& y_hi) {
            const double phi = angle0 + omega * tau;
            const double px = cfg.loop_cx + radius * std::cos(phi);
            const double py = cfg.loop_cy + radius * std::sin(phi);
            const double heading = phi + direction * kPi / 2;
            const double ext_x = cfg.agent_length / 2 * std::abs(std::cos(heading)) +
                                 cfg.agent_width / 2 * std::abs(std::sin(heading));
            const double ext_y = cfg.agent_length / 2 * std::abs(std::sin(heading)) +
                                 cfg.agent_width / 2 * std::abs(std::cos(heading));
            x_lo = px - ext_x;
            x_hi = px + ext_x;
            y_lo = py - ext_y;
            y_hi = py + ext_y;
        };

        const auto horizon_slabs = static_cast<std::uint64_t>(
            std::min<double>(static_cast<double>(nt), std::ceil(cfg.horizon / w_tau)));
        for (std::uint64_t ct = 0; ct < horizon_slabs; ++ct) {
            const double tau_a = static_cast<double>(ct) * w_tau;
            const double tau_b = tau_a + w_tau;
            double ax0, ax1, ay0, ay1, bx0, bx1, by0, by1;
            agent_extent(tau_a, ax0, ax1, ay0, ay1);
            agent_extent(tau_b, bx0, bx1, by0, by1);
            Box box;
            box.lo = {std::min(ax0, bx0), std::min(ay0, by0),
                      grid.lower(2) + (static_cast<double>(ct) + 0.25) * w_tau};
            box.hi = {std::max(ax1, bx1), std::max(ay1, by1),
                      grid.lower(2) + (static_cast<double>(ct) + 0.75) * w_tau};
            if (box.lo[0] < grid.lower(0) || box.hi[0] > grid.upper(0) ||
                box.lo[1] < grid.lower(1) || box.hi[1] > grid.upper(1)) {
                throw std::domain_error("agent outside workspace");
            }
            indices.clear();
            rasterize_box_indices(box, grid, indices);
            for (std::uint64_t i : indices) out.moving_vehicle.set(i);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark protocol
// ---------------------------------------------------------------------------

namespace {

struct Welford {
    std::uint64_t n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

double time_label_ms(const CsrBoolMatrix& m, const DensePropMatrix& p, int workers,
                     int repeats) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(repeats, 1); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        LabelMatrix l = label_all(m, p, workers);
        const auto t1 = std::chrono::steady_clock::now();
        (void)l;
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

}  // namespace

BenchReport run_benchmark(const std::vector<const TransitionSystem*>& presets,
                          const ScenarioConfig& cfg, const FootprintSpec& footprint,
                          const GridSpec& grid, const BenchOptions& options) {
    if (options.queries < 1) throw std::invalid_argument("benchmark needs at least one query");
    BenchReport report;
    for (const TransitionSystem* system : presets) {
        const CsrBoolMatrix m = swept_volume_matrix(*system, footprint, grid, options.workers);
        const double occ_transition =
            m.rows == 0 ? 0.0
                        : static_cast<double>(m.nnz()) / static_cast<double>(m.rows) /
                              static_cast<double>(grid.cell_count());

        Welford time_mv, time_nnl;
        double occ_mv = 0, occ_nnl = 0;
        for (int q = -1; q < options.queries; ++q) {
            // Query -1 is the warm-up; it is timed but discarded.
            const auto query_index = static_cast<std::uint64_t>(q < 0 ? 0 : q);
            ScenarioVolumes volumes = generate_scenario(cfg, grid, query_index);
            const double o_mv = volumes.moving_vehicle.occupancy();
            const double o_nnl = volumes.not_nominal_lane.occupancy();
            DensePropMatrix p_mv(grid.cell_count(), {std::move(volumes.moving_vehicle)});
            DensePropMatrix p_nnl(grid.cell_count(), {std::move(volumes.not_nominal_lane)});
            const double ms_mv = time_label_ms(m, p_mv, options.workers, options.repeats);
            const double ms_nnl = time_label_ms(m, p_nnl, options.workers, options.repeats);
            if (q < 0) continue;
            time_mv.add(ms_mv);
            time_nnl.add(ms_nnl);
            occ_mv += o_mv;
            occ_nnl += o_nnl;
        }
        const auto nq = static_cast<double>(options.queries);
        auto make_cell = [&](const char* name, const Welford& w, double occ_sum) {
            BenchCell cell;
            cell.transitions = m.rows;
            cell.proposition = name;
            cell.mean_ms = w.mean;
            cell.var_ms = w.variance();
            cell.occupancy_transition = occ_transition;
            cell.occupancy_prop = occ_sum / nq;
            cell.throughput = w.mean > 0 ? static_cast<double>(m.rows) / (w.mean / 1000.0) : 0.0;
            cell.queries = w.n;
            return cell;
        };
        report.cells.push_back(make_cell(kMovingVehicle, time_mv, occ_mv));
        report.cells.push_back(make_cell(kNotNominalLane, time_nnl, occ_nnl));
    }
    return report;
}

std::string BenchReport::to_csv() const {
    std::ostringstream os;
    os << "size,proposition,mean_ms,var_ms,occupancy_transition,occupancy_prop,throughput\n";
    for (const auto& c : cells) {
        os << c.transitions << ',' << c.proposition << ',' << c.mean_ms << ',' << c.var_ms << ','
           << c.occupancy_transition << ',' << c.occupancy_prop << ',' << c.throughput << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Early-termination statistics
// ---------------------------------------------------------------------------

double bernoulli_experiment(double p_mot, double p_pred, std::uint64_t trials,
                            std::uint64_t row_length, std::uint64_t seed) {
    if (!(p_mot > 0 && p_mot <= 1) || !(p_pred > 0 && p_pred <= 1)) {
        throw std::invalid_argument("probabilities must lie in (0, 1]");
    }
    if (trials == 0 || row_length == 0) {
        throw std::invalid_argument("trials and row_length must be positive");
    }
    SplitMix64 rng(seed);
    double total = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t examined = row_length;
        for (std::uint64_t j = 0; j < row_length; ++j) {
            // Voxel j is motion-occupied with p_mot; only then is the
            // proposition column consulted, hitting with p_pred.
            if (rng.uniform() < p_mot && rng.uniform() < p_pred) {
                examined = j + 1;
                break;
            }
        }
        total += static_cast<double>(examined);
    }
    return total / static_cast<double>(trials);
}

std::map<std::string, LinearFit> fit_scaling(const BenchReport& report) {
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& c : report.cells) {
        series[c.proposition].emplace_back(static_cast<double>(c.transitions), c.mean_ms);
    }
    std::map<std::string, LinearFit> fits;
    for (auto& [prop, points] : series) {
        if (points.size() < 3) {
            throw std::invalid_argument("fit_scaling needs at least three system sizes");
        }
        std::sort(points.begin(), points.end());
        const auto n = static_cast<double>(points.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : points) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        LinearFit fit;
        const double denom = n * sxx - sx * sx;
        if (denom == 0) throw std::invalid_argument("degenerate sizes in fit_scaling");
        fit.slope = (n * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / n;
        for (auto [x, y] : points) {
            const double predicted = fit.slope * x + fit.intercept;
            fit.rel_residuals.push_back(y != 0 ? std::abs(predicted - y) / y : 0.0);
        }
        fits.emplace(prop, std::move(fit));
    }
    return fits;
}

}  // namespace ltlgrid
