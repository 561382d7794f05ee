#include "ltlgrid/planner.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace ltlgrid {

std::span<const std::uint32_t> ProductGraph::outgoing(std::uint32_t vertex) const {
    auto b = out_offsets_[vertex];
    auto e = out_offsets_[vertex + 1];
    return {out_index_.data() + b, out_index_.data() + e};
}

ProductGraph build_product(const TransitionSystem& s, const EdgeLabeling& labels,
                           const MonitorNfa& monitor, std::uint32_t v0) {
    if (v0 >= s.num_states()) throw std::invalid_argument("start state out of range");
    if (labels.labels.size() != s.num_edges()) {
        throw std::invalid_argument("labeling does not cover every edge");
    }
    if (labels.alphabet_size != monitor.automaton().alphabet()->size()) {
        throw std::invalid_argument("labeling and monitor alphabets differ");
    }
    for (double c : s.costs) {
        if (!(c >= 0)) throw std::invalid_argument("negative edge cost");
    }

    // Transition-system adjacency.
    std::vector<std::vector<std::uint32_t>> ts_out(s.num_states());
    for (std::uint32_t e = 0; e < s.num_edges(); ++e) {
        ts_out[s.edges[e].from].push_back(e);
    }

    const BuchiAutomaton& a = monitor.automaton();
    ProductGraph g;
    std::map<std::pair<std::uint32_t, int>, std::uint32_t> index;

    auto intern = [&](std::uint32_t v, int q) {
        auto [it, fresh] = index.emplace(std::make_pair(v, q),
                                         static_cast<std::uint32_t>(g.vertices_.size()));
        if (fresh) g.vertices_.push_back({v, q});
        return std::make_pair(it->second, fresh);
    };

    intern(v0, a.initial());
    // vertices_ grows during the scan; index-based BFS over it.
    for (std::uint32_t pid = 0; pid < g.vertices_.size(); ++pid) {
        const ProductVertex pv = g.vertices_[pid];
        for (std::uint32_t e : ts_out[pv.v]) {
            const AlphabetSymbol label = labels.labels[e];
            for (int ti : a.outgoing(pv.q)) {
                const auto& t = a.transitions()[static_cast<std::size_t>(ti)];
                if (!t.guard.admits(label) || !monitor.is_live(t.to)) continue;
                const std::uint32_t to_pid = intern(s.edges[e].to, t.to).first;
                g.edges_.push_back({pid, to_pid, e, s.costs[e]});
            }
        }
    }

    g.out_offsets_.assign(g.vertices_.size() + 1, 0);
    for (const auto& e : g.edges_) ++g.out_offsets_[e.from + 1];
    for (std::size_t i = 1; i < g.out_offsets_.size(); ++i) {
        g.out_offsets_[i] += g.out_offsets_[i - 1];
    }
    g.out_index_.resize(g.edges_.size());
    std::vector<std::uint64_t> fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    for (std::uint32_t i = 0; i < g.edges_.size(); ++i) {
        g.out_index_[fill[g.edges_[i].from]++] = i;
    }
    return g;
}

std::optional<PlannedPath> shortest_safe_path(const ProductGraph& g,
                                              std::span<const std::uint32_t> goal_states) {
    const std::size_t n = g.vertices().size();
    for (const auto& e : g.edges()) {
        if (!(e.weight >= 0)) throw std::invalid_argument("negative weight detected");
    }

    // Reverse Dijkstra from every goal vertex with key (cost, hops); the
    // forward walk below then follows optimal moves choosing the smallest
    // successor, which yields the min-cost, then shortest, then
    // lexicographically smallest path.
    std::vector<std::vector<std::uint32_t>> rev(n);
    for (std::uint32_t i = 0; i < g.edges().size(); ++i) {
        rev[g.edges()[i].to].push_back(i);
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr std::uint64_t kNoHops = std::numeric_limits<std::uint64_t>::max();
    std::vector<double> cost_to_goal(n, kInf);
    std::vector<std::uint64_t> hops_to_goal(n, kNoHops);

    using Key = std::tuple<double, std::uint64_t, std::uint32_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
    std::vector<char> is_goal(n, 0);
    for (std::uint32_t pid = 0; pid < n; ++pid) {
        const auto v = g.vertices()[pid].v;
        for (std::uint32_t gs : goal_states) {
            if (v == gs) {
                is_goal[pid] = 1;
                cost_to_goal[pid] = 0;
                hops_to_goal[pid] = 0;
                heap.emplace(0.0, 0, pid);
                break;
            }
        }
    }
    while (!heap.empty()) {
        auto [c, h, pid] = heap.top();
        heap.pop();
        if (c > cost_to_goal[pid] || (c == cost_to_goal[pid] && h > hops_to_goal[pid])) continue;
        for (std::uint32_t ei : rev[pid]) {
            const auto& e = g.edges()[ei];
            const double nc = c + e.weight;
            const std::uint64_t nh = h + 1;
            if (nc < cost_to_goal[e.from] ||
                (nc == cost_to_goal[e.from] && nh < hops_to_goal[e.from])) {
                cost_to_goal[e.from] = nc;
                hops_to_goal[e.from] = nh;
                heap.emplace(nc, nh, e.from);
            }
        }
    }

    const std::uint32_t start = g.start_vertex();
    if (n == 0 || cost_to_goal[start] == kInf) return std::nullopt;

    PlannedPath path;
    path.cost = cost_to_goal[start];
    std::uint32_t cur = start;
    path.vertices.push_back(g.vertices()[cur]);
    while (!is_goal[cur] || hops_to_goal[cur] != 0) {
        std::uint32_t best_edge = 0;
        std::uint32_t best_to = std::numeric_limits<std::uint32_t>::max();
        bool found = false;
        for (std::uint32_t ei : g.outgoing(cur)) {
            const auto& e = g.edges()[ei];
            if (cost_to_goal[e.to] + e.weight != cost_to_goal[cur]) continue;
            if (hops_to_goal[e.to] == kNoHops || hops_to_goal[e.to] + 1 != hops_to_goal[cur]) continue;
            // Lexicographic order over (state id, monitor id) of the successor.
            const auto& cand = g.vertices()[e.to];
            const auto& best = best_to == std::numeric_limits<std::uint32_t>::max()
                                   ? cand
                                   : g.vertices()[best_to];
            if (!found || std::make_pair(cand.v, cand.q) < std::make_pair(best.v, best.q)) {
                best_edge = ei;
                best_to = e.to;
                found = true;
            }
        }
        if (!found) throw std::logic_error("shortest_safe_path: inconsistent distance table");
        path.ts_edges.push_back(g.edges()[best_edge].ts_edge);
        cur = best_to;
        path.vertices.push_back(g.vertices()[cur]);
    }
    return path;
}

Verdict check_trace(const TransitionSystem& s, const EdgeLabeling& labels,
                    const MonitorNfa& monitor, std::span<const std::uint32_t> trace) {
    if (labels.labels.size() != s.num_edges()) {
        throw std::invalid_argument("labeling does not cover every edge");
    }
    std::unordered_map<std::uint64_t, std::uint32_t> edge_of;
    edge_of.reserve(s.num_edges() * 2);
    for (std::uint32_t e = 0; e < s.num_edges(); ++e) {
        edge_of[(static_cast<std::uint64_t>(s.edges[e].from) << 32) | s.edges[e].to] = e;
    }
    std::vector<AlphabetSymbol> word;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        if (trace[i] >= s.num_states() || trace[i + 1] >= s.num_states()) {
            throw std::invalid_argument("trace state out of range at step " + std::to_string(i));
        }
        auto it = edge_of.find((static_cast<std::uint64_t>(trace[i]) << 32) | trace[i + 1]);
        if (it == edge_of.end()) {
            throw std::invalid_argument("trace step " + std::to_string(i) +
                                        " is not an edge of the system");
        }
        word.push_back(labels.labels[it->second]);
    }
    return run_monitor(monitor, word);
}

std::string path_to_json(const PlannedPath& path, const TransitionSystem& s,
                         const EdgeLabeling& labels, const Alphabet& alphabet) {
    nlohmann::json j;
    j["cost"] = path.cost;
    auto vs = nlohmann::json::array();
    for (const auto& pv : path.vertices) {
        vs.push_back({{"state", pv.v}, {"monitor", pv.q}});
    }
    j["vertices"] = std::move(vs);
    auto es = nlohmann::json::array();
    for (std::uint32_t e : path.ts_edges) {
        nlohmann::json ej;
        ej["from"] = s.edges[e].from;
        ej["to"] = s.edges[e].to;
        ej["cost"] = s.costs[e];
        ej["labels"] = symbol_names(alphabet, labels.labels[e]);
        es.push_back(std::move(ej));
    }
    j["edges"] = std::move(es);
    return j.dump(2);
}

std::string product_to_dot(const ProductGraph& g) {
    std::ostringstream os;
    os << "digraph product {\n  rankdir=LR;\n";
    for (std::uint32_t i = 0; i < g.vertices().size(); ++i) {
        const auto& pv = g.vertices()[i];
        os << "  n" << i << " [label=\"v" << pv.v << ",q" << pv.q << "\"];\n";
    }
    for (const auto& e : g.edges()) {
        os << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.weight << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace ltlgrid
