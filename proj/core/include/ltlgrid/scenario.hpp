#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ltlgrid/abstraction.hpp"
#include "ltlgrid/grid.hpp"
#include "ltlgrid/label.hpp"

namespace ltlgrid {

/// Circular-loop driving scenario: the ego vehicle's roadmap lives around a
/// closed loop; other agents drive along it at random lateral offsets and
/// speeds. Defaults are calibrated so not_nominal_lane covers roughly 90%
/// of the workspace and moving_vehicle roughly 1%.
struct ScenarioConfig {
    double loop_cx = 36;
    double loop_cy = 36;
    double loop_radius = 24;
    double lane_width = 4.2;
    int agent_count = 3;
    double agent_speed_min = 8;
    double agent_speed_max = 14;
    double agent_length = 4.6;
    double agent_width = 2.0;
    double lateral_spread = 3.5;
    double horizon = 7.2;
    std::uint64_t seed = 1;
};

/// The workspace used by the benchmark protocol: 72 m x 72 m x 7.2 s.
GridSpec default_bench_grid(int depth = 21);

/// Roadmap configuration matching the scenario geometry; target_edges picks
/// the transition count of the preset.
AbstractionConfig loop_abstraction_config(const ScenarioConfig& cfg, const GridSpec& grid,
                                          std::uint64_t target_edges);

struct ScenarioVolumes {
    OccupancyBitset moving_vehicle;     // union of agents' anticipated swept boxes
    OccupancyBitset not_nominal_lane;   // complement of the nominal-lane tube
};

/// Proposition volumes for one labeling query; deterministic in
/// (cfg.seed, query_index).
ScenarioVolumes generate_scenario(const ScenarioConfig& cfg, const GridSpec& grid,
                                  std::uint64_t query_index);

struct BenchCell {
    std::uint64_t transitions = 0;
    std::string proposition;
    double mean_ms = 0;
    double var_ms = 0;
    double occupancy_transition = 0;  // mean row occupancy of the swept matrix
    double occupancy_prop = 0;        // mean workspace occupancy of the proposition
    double throughput = 0;            // transitions * propositions per second
    std::uint64_t queries = 0;
};

struct BenchReport {
    std::vector<BenchCell> cells;

    std::string to_csv() const;
};

struct BenchOptions {
    int queries = 150;
    int workers = 0;
    // Each query's scan is timed `repeats` times and the fastest repetition
    // is recorded, which filters scheduler noise out of the statistics.
    int repeats = 2;
};

/// Benchmark protocol: per preset system, time label_all over the query
/// set for each proposition separately; one warm-up query is excluded.
BenchReport run_benchmark(const std::vector<const TransitionSystem*>& presets,
                          const ScenarioConfig& cfg, const FootprintSpec& footprint,
                          const GridSpec& grid, const BenchOptions& options = {});

/// Mean number of sequentially examined voxels before the first
/// simultaneously occupied one, when every voxel is independently occupied
/// by the motion with probability p_mot and by the predicate with
/// probability p_pred; rows are truncated at row_length voxels.
double bernoulli_experiment(double p_mot, double p_pred, std::uint64_t trials,
                            std::uint64_t row_length, std::uint64_t seed);

/// Closed-form prediction for the experiment above.
inline double bernoulli_prediction(double p_mot, double p_pred) {
    return 1.0 / (p_pred * p_mot);
}

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    std::vector<double> rel_residuals;  // |fit - observed| / observed per size
};

/// Least-squares line of mean labeling time versus transition count, one
/// fit per proposition; requires at least three system sizes.
std::map<std::string, LinearFit> fit_scaling(const BenchReport& report);

}  // namespace ltlgrid
