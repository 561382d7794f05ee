#include <doctest.h>

#include <cmath>

#include "ltlgrid/scenario.hpp"
#include "support/oracles.hpp"

using namespace ltlgrid;

TEST_CASE("generate_scenario: deterministic in seed and query index") {
    ScenarioConfig cfg;
    auto grid = default_bench_grid(12);
    auto a = generate_scenario(cfg, grid, 3);
    auto b = generate_scenario(cfg, grid, 3);
    CHECK(a.moving_vehicle == b.moving_vehicle);
    CHECK(a.not_nominal_lane == b.not_nominal_lane);
    auto c = generate_scenario(cfg, grid, 4);
    CHECK_FALSE(a.moving_vehicle == c.moving_vehicle);
    cfg.seed = 2;
    auto d = generate_scenario(cfg, grid, 3);
    CHECK_FALSE(a.moving_vehicle == d.moving_vehicle);
    // the lane volume is static
    CHECK(a.not_nominal_lane == c.not_nominal_lane);
}

TEST_CASE("generate_scenario: no agents means an empty moving_vehicle volume") {
    ScenarioConfig cfg;
    cfg.agent_count = 0;
    auto grid = default_bench_grid(12);
    auto v = generate_scenario(cfg, grid, 0);
    CHECK(v.moving_vehicle.count() == 0);
    CHECK(v.not_nominal_lane.count() > 0);
}

TEST_CASE("generate_scenario: occupancy brackets for the default configuration") {
    ScenarioConfig cfg;
    auto grid = default_bench_grid(21);
    for (std::uint64_t q = 0; q < 3; ++q) {
        auto v = generate_scenario(cfg, grid, q);
        CHECK(v.not_nominal_lane.occupancy() >= 0.85);
        CHECK(v.not_nominal_lane.occupancy() <= 0.95);
        CHECK(v.moving_vehicle.occupancy() >= 0.005);
        CHECK(v.moving_vehicle.occupancy() <= 0.02);
    }
}

TEST_CASE("generate_scenario: lane volume matches the distance rule cell-wise") {
    ScenarioConfig cfg;
    auto grid = default_bench_grid(9);  // 8x8x8 cells
    auto v = generate_scenario(cfg, grid, 0);
    for (std::uint64_t i = 0; i < grid.cell_count(); ++i) {
        const auto cells = oracles::decode_cells(i, grid);
        const double x = grid.lower(0) + (static_cast<double>(cells[0]) + 0.5) * grid.cell_width(0);
        const double y = grid.lower(1) + (static_cast<double>(cells[1]) + 0.5) * grid.cell_width(1);
        const double r = std::hypot(x - cfg.loop_cx, y - cfg.loop_cy);
        const bool outside = std::abs(r - cfg.loop_radius) > cfg.lane_width / 2;
        REQUIRE(v.not_nominal_lane.test(i) == outside);
    }
}

TEST_CASE("generate_scenario: agent boxes respect their time slabs") {
    ScenarioConfig cfg;
    cfg.agent_count = 1;
    auto grid = default_bench_grid(12);  // 16x16x16 cells
    auto v = generate_scenario(cfg, grid, 1);
    REQUIRE(v.moving_vehicle.count() > 0);
    // Per-slab projections must be contiguous boxes: for every slab, the
    // set cells form an axis-aligned rectangle (a single agent sweeps one
    // box per slab).
    std::vector<std::uint64_t> idx;
    v.moving_vehicle.collect(idx);
    const std::uint64_t nt = grid.axis_cells(2);
    std::vector<std::uint64_t> min_x(nt, ~0ull), max_x(nt, 0), min_y(nt, ~0ull), max_y(nt, 0),
        count(nt, 0);
    for (auto i : idx) {
        auto cells = oracles::decode_cells(i, grid);
        min_x[cells[2]] = std::min(min_x[cells[2]], cells[0]);
        max_x[cells[2]] = std::max(max_x[cells[2]], cells[0]);
        min_y[cells[2]] = std::min(min_y[cells[2]], cells[1]);
        max_y[cells[2]] = std::max(max_y[cells[2]], cells[1]);
        ++count[cells[2]];
    }
    for (std::uint64_t t = 0; t < nt; ++t) {
        if (!count[t]) continue;
        CHECK(count[t] == (max_x[t] - min_x[t] + 1) * (max_y[t] - min_y[t] + 1));
    }
}

TEST_CASE("generate_scenario: rejects a horizon beyond the grid") {
    ScenarioConfig cfg;
    cfg.horizon = 100;
    CHECK_THROWS_AS(generate_scenario(cfg, default_bench_grid(12), 0), std::invalid_argument);
}

TEST_CASE("bernoulli_experiment: degenerate and closed-form cases") {
    CHECK(bernoulli_experiment(1.0, 1.0, 1000, 64, 1) == 1.0);
    CHECK_THROWS_AS(bernoulli_experiment(0.0, 0.5, 10, 64, 1), std::invalid_argument);
    CHECK_THROWS_AS(bernoulli_experiment(0.5,, 10, 64, 1), std::invalid_argument);

    const double mean = bernoulli_experiment(0.1, 0.5, 100000, 4096, 7);
    CHECK(std::abs(mean - bernoulli_prediction(0.1, 0.5)) / bernoulli_prediction(0.1, 0.5) < 0.05);
}

TEST_CASE("bernoulli_experiment: mean voxels examined nonincreasing in p_pred") {
    double prev = 1e18;
    for (double p_pred : {0.1, 0.3, 0.6, 1.0}) {
        const double mean = bernoulli_experiment(0.2, p_pred, 20000, 4096, 11);
        CHECK(mean <= prev + 0.5);
        prev = mean;
    }
}

TEST_CASE("fit_scaling: exact line, residuals, and validation") {
    BenchReport report;
    for (std::uint64_t size : {1000, 2000, 4000, 8000}) {
        BenchCell mv;
        mv.transitions = size;
        mv.proposition = "moving_vehicle";
        mv.mean_ms = 0.5 + 0.001 * static_cast<double>(size);
        report.cells.push_back(mv);
        BenchCell nnl = mv;
        nnl.proposition = "not_nominal_lane";
        nnl.mean_ms = 0.1 + 0.0002 * static_cast<double>(size);
        report.cells.push_back(nnl);
    }
    auto fits = fit_scaling(report);
    REQUIRE(fits.count("moving_vehicle") == 1);
    CHECK(fits["moving_vehicle"].slope == doctest::Approx(0.001));
    CHECK(fits["moving_vehicle"].intercept == doctest::Approx(0.5));
    for (double r : fits["moving_vehicle"].rel_residuals) CHECK(r < 1e-9);
    CHECK(fits["not_nominal_lane"].slope == doctest::Approx(0.0002));

    BenchReport tiny;
    tiny.cells = {report.cells[0], report.cells[2]};
    CHECK_THROWS_AS(fit_scaling(tiny), std::invalid_argument);
}

TEST_CASE("run_benchmark: report shape, csv format, and throughput identity") {
    ScenarioConfig cfg;
    auto grid = default_bench_grid(12);
    auto acfg = loop_abstraction_config(cfg, grid, 300);
    auto ts1 = build_abstraction(acfg, 1);
    acfg.target_edges = 600;
    auto ts2 = build_abstraction(acfg, 2);
    BenchOptions opt;
    opt.queries = 3;
    opt.workers = 1;
    std::vector<const TransitionSystem*> presets{&ts1, &ts2};
    auto report = run_benchmark(presets, cfg, acfg.footprint, grid, opt);
    REQUIRE(report.cells.size() == 4);
    CHECK(report.cells[0].proposition == "moving_vehicle");
    CHECK(report.cells[1].proposition == "not_nominal_lane");
    CHECK(report.cells[0].transitions == 300);
    CHECK(report.cells[2].transitions == 600);
    for (const auto& c : report.cells) {
        CHECK(c.queries == 3);
        CHECK(c.mean_ms > 0);
        CHECK(c.throughput ==
              doctest::Approx(static_cast<double>(c.transitions) / (c.mean_ms / 1000.0)));
    }
    auto csv = report.to_csv();
    CHECK(csv.rfind("size,proposition,mean_ms,var_ms,occupancy_transition,occupancy_prop,"
                    "throughput\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("loop_abstraction_config: respects the grid bounds") {
    ScenarioConfig cfg;
    auto grid = default_bench_grid(12);
    auto acfg = loop_abstraction_config(cfg, grid, 100);
    CHECK(acfg.x_max == grid.upper(0));
    CHECK(acfg.tau_limit < grid.upper(2));
    CHECK(acfg.region == SampleRegion::Loop);
    CHECK_THROWS_AS(loop_abstraction_config(cfg, GridSpec({{0.0, 1.0}}, 4), 10),
                    std::invalid_argument);
}
