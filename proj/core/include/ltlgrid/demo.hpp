#pragma once

#include "ltlgrid/abstraction.hpp"
#include "ltlgrid/label.hpp"
#include "ltlgrid/ltl.hpp"

namespace ltlgrid {

/// Hand-built split-lane planning instance: six states, nine transitions,
/// costs in {0, 1}, labels over the singleton alphabet {split_lane}. The
/// unconstrained shortest path from `start` to `goal` takes two consecutive
/// split_lane transitions; the cheapest path respecting
/// `G (split_lane -> X !split_lane)` costs strictly more.
struct LaneDemo {
    TransitionSystem system;
    EdgeLabeling labeling;
    AlphabetPtr alphabet;
    LtlPtr no_consecutive_split;
    std::uint32_t start = 0;
    std::uint32_t goal = 5;
};

LaneDemo lane_demo();

}  // namespace ltlgrid
