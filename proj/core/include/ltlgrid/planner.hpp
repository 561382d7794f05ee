#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltlgrid/abstraction.hpp"
#include "ltlgrid/buchi.hpp"
#include "ltlgrid/label.hpp"

namespace ltlgrid {

struct ProductVertex {
    std::uint32_t v = 0;  // transition-system state
    int q = 0;            // monitor state

    friend bool operator==(const ProductVertex&, const ProductVertex&) = default;
};

/// Synchronous product of a labeled transition system with a safety monitor,
/// restricted to the part reachable from (v0, q0). A product edge exists
/// when the underlying edge exists, the monitor steps on the edge's label,
/// and the successor monitor state is live.
class ProductGraph {
public:
    struct Edge {
        std::uint32_t from = 0;     // product vertex index
        std::uint32_t to = 0;       // product vertex index
        std::uint32_t ts_edge = 0;  // edge index in the transition system
        double weight = 0;
    };

    const std::vector<ProductVertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const std::uint32_t> outgoing(std::uint32_t vertex) const;
    std::uint32_t start_vertex() const { return 0; }

    friend ProductGraph build_product(const TransitionSystem& s, const EdgeLabeling& labels,
                                      const MonitorNfa& monitor, std::uint32_t v0);

private:
    std::vector<ProductVertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> out_index_;
    std::vector<std::uint64_t> out_offsets_;
};

ProductGraph build_product(const TransitionSystem& s, const EdgeLabeling& labels,
                           const MonitorNfa& monitor, std::uint32_t v0);

/// Minimum-cost monitor-consistent path; ties broken by fewer edges, then by
/// the lexicographically smallest vertex sequence.
struct PlannedPath {
    std::vector<ProductVertex> vertices;
    std::vector<std::uint32_t> ts_edges;  // transition-system edge per hop
    double cost = 0;
};

/// Shortest path from the product start to any product vertex whose
/// transition-system component lies in `goal_states`; nullopt when no
/// monitor-consistent path exists.
std::optional<PlannedPath> shortest_safe_path(const ProductGraph& g,
                                              std::span<const std::uint32_t> goal_states);

/// Replays a state trace through the labeling function and the monitor.
/// Throws if a consecutive pair is not an edge of the system.
Verdict check_trace(const TransitionSystem& s, const EdgeLabeling& labels,
                    const MonitorNfa& monitor, std::span<const std::uint32_t> trace);

std::string path_to_json(const PlannedPath& path, const TransitionSystem& s,
                         const EdgeLabeling& labels, const Alphabet& alphabet);

/// DOT rendering of small product graphs for documentation.
std::string product_to_dot(const ProductGraph& g);

}  // namespace ltlgrid
