#include "ltlgrid/demo.hpp"

namespace ltlgrid {

namespace {

Trajectory line_between(const State5& a, const State5& b, int samples) {
    Trajectory tr;
    tr.step = 1.0;
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        State5 s;
        s.px = a.px + t * (b.px - a.px);
        s.py = a.py + t * (b.py - a.py);
        s.heading = a.heading;
        s.speed = a.speed;
        s.tau = a.tau + static_cast<double>(i);
        tr.samples.push_back(s);
    }
    return tr;
}

}  // namespace

LaneDemo lane_demo() {
    LaneDemo demo;
    demo.alphabet = Alphabet::make({"split_lane"});
    demo.no_consecutive_split =
        parse_ltl("G (split_lane -> X !split_lane)", demo.alphabet);

    auto& ts = demo.system;
    ts.states = {
        {0, 0, 0, 10, 0},    // v0
        {10, 3, 0, 10, 1},   // v1
        {10, -3, 0, 10, 1},  // v2
        {20, 3, 0, 10, 2},   // v3
        {20, -3, 0, 10, 2},  // v4
        {30, 0, 0, 10, 3},   // v5
    };

    struct Spec {
        std::uint32_t from, to;
        bool split;
        double cost;
        int samples;
    };
    // The v0 v1 v3 v5 chain is free but splits lanes twice in a row; the
    // monitored optimum detours through v4 for cost 1.
    const Spec edges[] = {
        {0, 1, true, 0, 2},   {0, 2, false, 1, 2}, {1, 3, true, 0, 2},
        {1, 4, false, 1, 2},  {2, 3, true, 1, 2},  {2, 4, true, 0, 2},
        {3, 5, false, 0, 2},  {4, 5, false, 0, 2}, {2, 5, false, 1, 3},
    };
    demo.labeling.alphabet_size = 1;
    for (const Spec& e : edges) {
        ts.edges.push_back({e.from, e.to});
        ts.costs.push_back(e.cost);
        ts.trajectories.push_back(line_between(ts.states[e.from], ts.states[e.to], e.samples));
        ts.controls.push_back({});
        AlphabetSymbol label;
        if (e.split) label.set(0);
        demo.labeling.labels.push_back(label);
    }
    return demo;
}

}  // namespace ltlgrid
