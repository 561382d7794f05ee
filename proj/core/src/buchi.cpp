#include "ltlgrid/buchi.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ltlgrid {

// ---------------------------------------------------------------------------
// BuchiAutomaton
// ---------------------------------------------------------------------------

BuchiAutomaton::BuchiAutomaton(AlphabetPtr alphabet, int num_states, int initial,
                               std::vector<int> accepting,
                               std::vector<BuchiTransition> transitions)
    : alphabet_(std::move(alphabet)),
      num_states_(num_states),
      initial_(initial),
      transitions_(std::move(transitions)) {
    if (!alphabet_) throw std::invalid_argument("automaton requires an alphabet");
    if (num_states_ <= 0) throw std::invalid_argument("automaton needs at least one state");
    if (initial_ < 0 || initial_ >= num_states_) {
        throw std::invalid_argument("initial state out of range");
    }
    accepting_mask_.assign(static_cast<std::size_t>(num_states_), 0);
    for (int q : accepting) {
        if (q < 0 || q >= num_states_) throw std::invalid_argument("accepting state out of range");
        accepting_mask_[static_cast<std::size_t>(q)] = 1;
    }
    const std::uint64_t prop_mask =
        alphabet_->size() == 64 ? ~std::uint64_t{0}
                                : ((std::uint64_t{1} << alphabet_->size()) - 1);
    for (const auto& t : transitions_) {
        if (t.from < 0 || t.from >= num_states_ || t.to < 0 || t.to >= num_states_) {
            throw std::invalid_argument("transition endpoint out of range");
        }
        if ((t.guard.positive | t.guard.negative) & ~prop_mask) {
            throw std::invalid_argument("transition guard mentions unknown propositions");
        }
        if (!t.guard.satisfiable()) {
            throw std::invalid_argument("unsatisfiable transition guard");
        }
    }
    out_offsets_.assign(static_cast<std::size_t>(num_states_) + 1, 0);
    for (const auto& t : transitions_) ++out_offsets_[static_cast<std::size_t>(t.from) + 1];
    for (int q = 0; q < num_states_; ++q) {
        out_offsets_[static_cast<std::size_t>(q) + 1] += out_offsets_[static_cast<std::size_t>(q)];
    }
    out_index_.resize(transitions_.size());
    std::vector<int> fill(out_offsets_.begin(), out_offsets_.end() - 1);
    for (int i = 0; i < static_cast<int>(transitions_.size()); ++i) {
        out_index_[static_cast<std::size_t>(fill[static_cast<std::size_t>(transitions_[static_cast<std::size_t>(i)].from)]++)] = i;
    }
}

std::vector<int> BuchiAutomaton::accepting_states() const {
    std::vector<int> out;
    for (int q = 0; q < num_states_; ++q) {
        if (accepting_mask_[static_cast<std::size_t>(q)]) out.push_back(q);
    }
    return out;
}

std::span<const int> BuchiAutomaton::outgoing(int q) const {
    if (q < 0 || q >= num_states_) throw std::out_of_range("state id out of range");
    auto b = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(q)]);
    auto e = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(q) + 1]);
    return {out_index_.data() + b, e - b};
}

// ---------------------------------------------------------------------------
// LTL -> Buchi: on-the-fly tableau over NNF
// ---------------------------------------------------------------------------

namespace {

// Hash-consed store of NNF subformulae; ids give the deterministic
// processing order of the tableau expansion.
class NnfArena {
public:
    struct Entry {
        LtlOp op;
        int atom = -1;
        int left = -1;
        int right = -1;
    };

    int intern(const LtlFormula& f) {
        Entry e;
        e.op = f.op();
        switch (f.op()) {
            case LtlOp::True:
            case LtlOp::False:
                break;
            case LtlOp::Atom:
                e.atom = f.atom_id();
                break;
            case LtlOp::Not:
                if (f.left()->op() != LtlOp::Atom) {
                    throw std::logic_error("tableau input must be in negation normal form");
                }
                e.left = intern(*f.left());
                break;
            case LtlOp::And:
            case LtlOp::Or:
            case LtlOp::Until:
            case LtlOp::Release:
                e.left = intern(*f.left());
                e.right = intern(*f.right());
                break;
            case LtlOp::Next:
                e.left = intern(*f.left());
                break;
            default:
                throw std::logic_error("tableau input must be in negation normal form");
        }
        return intern(e);
    }

    int intern(Entry e) {
        auto key = std::make_tuple(e.op, e.atom, e.left, e.right);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(entries_.size());
        entries_.push_back(e);
        index_.emplace(key, id);
        if (e.op == LtlOp::Until) untils_.push_back(id);
        return id;
    }

    const Entry& at(int id) const { return entries_[static_cast<std::size_t>(id)]; }
    const std::vector<int>& untils() const { return untils_; }

private:
    std::vector<Entry> entries_;
    std::map<std::tuple<LtlOp, int, int, int>, int> index_;
    std::vector<int> untils_;
};

struct TableauNode {
    std::set<int> old;
    std::set<int> next;
    std::set<int> incoming;  // node ids; -1 marks the virtual initial node
};

class TableauBuilder {
public:
    TableauBuilder(NnfArena& arena, int max_states) : arena_(arena), max_states_(max_states) {}

    std::vector<TableauNode> build(int root) {
        expand({root}, {}, {}, {-1});
        return std::move(nodes_);
    }

private:
    void expand(std::set<int> todo, std::set<int> old, std::set<int> next,
                std::set<int> incoming) {
        while (!todo.empty()) {
            int id = *todo.begin();
            todo.erase(todo.begin());
            if (old.count(id)) continue;
            const auto& e = arena_.at(id);
            switch (e.op) {
                case LtlOp::True:
                    continue;
                case LtlOp::False:
                    return;  // inconsistent node
                case LtlOp::Atom:
                case LtlOp::Not: {
                    int negated = (e.op == LtlOp::Atom)
                                      ? arena_.intern({LtlOp::Not, -1, id, -1})
                                      : e.left;
                    if (old.count(negated)) return;
                    old.insert(id);
                    continue;
                }
                case LtlOp::And:
                    old.insert(id);
                    if (!old.count(e.left)) todo.insert(e.left);
                    if (!old.count(e.right)) todo.insert(e.right);
                    continue;
                case LtlOp::Next:
                    old.insert(id);
                    next.insert(e.left);
                    continue;
                case LtlOp::Or: {
                    old.insert(id);
                    auto todo_l = todo;
                    todo_l.insert(e.left);
                    expand(std::move(todo_l), old, next, incoming);
                    todo.insert(e.right);
                    continue;
                }
                case LtlOp::Until: {
                    old.insert(id);
                    auto todo_l = todo;
                    todo_l.insert(e.left);
                    auto next_l = next;
                    next_l.insert(id);
                    expand(std::move(todo_l), old, std::move(next_l), incoming);
                    todo.insert(e.right);
                    continue;
                }
                case LtlOp::Release: {
                    old.insert(id);
                    auto todo_l = todo;
                    todo_l.insert(e.right);
                    auto next_l = next;
                    next_l.insert(id);
                    expand(std::move(todo_l), old, std::move(next_l), incoming);
                    todo.insert(e.left);
                    todo.insert(e.right);
                    continue;
                }
                default:
                    throw std::logic_error("tableau: unexpected operator");
            }
        }

        auto key = std::make_pair(old, next);
        auto it = seen_.find(key);
        if (it != seen_.end()) {
            auto& node = nodes_[static_cast<std::size_t>(it->second)];
            node.incoming.insert(incoming.begin(), incoming.end());
            return;
        }
        if (static_cast<int>(nodes_.size()) >= max_states_) {
            throw std::runtime_error("ltl_to_buchi: state cap exceeded");
        }
        int node_id = static_cast<int>(nodes_.size());
        nodes_.push_back({old, next, incoming});
        seen_.emplace(std::move(key), node_id);
        expand(next, {}, {}, {node_id});
    }

    NnfArena& arena_;
    int max_states_;
    std::vector<TableauNode> nodes_;
    std::map<std::pair<std::set<int>, std::set<int>>, int> seen_;
};

TransitionGuard guard_of(const NnfArena& arena, const std::set<int>& old) {
    TransitionGuard g;
    for (int id : old) {
        const auto& e = arena.at(id);
        if (e.op == LtlOp::Atom) {
            g.positive |= std::uint64_t{1} << e.atom;
        } else if (e.op == LtlOp::Not) {
            g.negative |= std::uint64_t{1} << arena.at(e.left).atom;
        }
    }
    return g;
}

struct RawAutomaton {
    int num_states = 0;
    int initial = 0;
    std::vector<char> accepting;
    std::vector<BuchiTransition> transitions;
};

void dedupe_transitions(std::vector<BuchiTransition>& ts) {
    std::sort(ts.begin(), ts.end(), [](const BuchiTransition& a, const BuchiTransition& b) {
        return std::tie(a.from, a.to, a.guard.positive, a.guard.negative) <
               std::tie(b.from, b.to, b.guard.positive, b.guard.negative);
    });
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](const BuchiTransition& a, const BuchiTransition& b) {
                             return a.from == b.from && a.to == b.to && a.guard == b.guard;
                         }),
             ts.end());
}

// Drops states unreachable from the initial state.
void drop_unreachable(RawAutomaton& a) {
    std::vector<char> reach(static_cast<std::size_t>(a.num_states), 0);
    std::deque<int> queue{a.initial};
    reach[static_cast<std::size_t>(a.initial)] = 1;
    std::vector<std::vector<int>> out(static_cast<std::size_t>(a.num_states));
    for (const auto& t : a.transitions) out[static_cast<std::size_t>(t.from)].push_back(t.to);
    while (!queue.empty()) {
        int q = queue.front();
        queue.pop_front();
        for (int to : out[static_cast<std::size_t>(q)]) {
            if (!reach[static_cast<std::size_t>(to)]) {
                reach[static_cast<std::size_t>(to)] = 1;
                queue.push_back(to);
            }
        }
    }
    std::vector<int> remap(static_cast<std::size_t>(a.num_states), -1);
    int n = 0;
    for (int q = 0; q < a.num_states; ++q) {
        if (reach[static_cast<std::size_t>(q)]) remap[static_cast<std::size_t>(q)] = n++;
    }
    std::vector<char> acc(static_cast<std::size_t>(n), 0);
    for (int q = 0; q < a.num_states; ++q) {
        if (remap[static_cast<std::size_t>(q)] >= 0) {
            acc[static_cast<std::size_t>(remap[static_cast<std::size_t>(q)])] =
                a.accepting[static_cast<std::size_t>(q)];
        }
    }
    std::vector<BuchiTransition> ts;
    for (const auto& t : a.transitions) {
        int f = remap[static_cast<std::size_t>(t.from)];
        int to = remap[static_cast<std::size_t>(t.to)];
        if (f >= 0 && to >= 0) ts.push_back({f, to, t.guard});
    }
    a.initial = remap[static_cast<std::size_t>(a.initial)];
    a.num_states = n;
    a.accepting = std::move(acc);
    a.transitions = std::move(ts);
}

// Quotient by iterated outgoing-signature equivalence (a forward
// bisimulation respecting acceptance); preserves the accepted language.
void quotient_states(RawAutomaton& a) {
    std::vector<int> cls(static_cast<std::size_t>(a.num_states));
    for (int q = 0; q < a.num_states; ++q) {
        cls[static_cast<std::size_t>(q)] = a.accepting[static_cast<std::size_t>(q)] ? 1 : 0;
    }
    for (;;) {
        using Sig = std::pair<int, std::vector<std::tuple<std::uint64_t, std::uint64_t, int>>>;
        std::vector<Sig> sigs(static_cast<std::size_t>(a.num_states));
        for (int q = 0; q < a.num_states; ++q) {
            sigs[static_cast<std::size_t>(q)].first = cls[static_cast<std::size_t>(q)];
        }
        for (const auto& t : a.transitions) {
            sigs[static_cast<std::size_t>(t.from)].second.emplace_back(
                t.guard.positive, t.guard.negative, cls[static_cast<std::size_t>(t.to)]);
        }
        std::map<Sig, int> index;
        std::vector<int> next_cls(static_cast<std::size_t>(a.num_states));
        for (int q = 0; q < a.num_states; ++q) {
            auto& s = sigs[static_cast<std::size_t>(q)].second;
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            auto [it, inserted] = index.emplace(sigs[static_cast<std::size_t>(q)],
                                                static_cast<int>(index.size()));
            next_cls[static_cast<std::size_t>(q)] = it->second;
        }
        if (next_cls == cls) break;
        cls = std::move(next_cls);
    }
    int n = 1 + *std::max_element(cls.begin(), cls.end());
    std::vector<char> acc(static_cast<std::size_t>(n), 0);
    for (int q = 0; q < a.num_states; ++q) {
        if (a.accepting[static_cast<std::size_t>(q)]) acc[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] = 1;
    }
    std::vector<BuchiTransition> ts;
    ts.reserve(a.transitions.size());
    for (const auto& t : a.transitions) {
        ts.push_back({cls[static_cast<std::size_t>(t.from)], cls[static_cast<std::size_t>(t.to)], t.guard});
    }
    dedupe_transitions(ts);
    a.initial = cls[static_cast<std::size_t>(a.initial)];
    a.num_states = n;
    a.accepting = std::move(acc);
    a.transitions = std::move(ts);
}

// Canonical numbering: breadth-first from the initial state, successors
// visited in (guard, old id) order. The initial state becomes 0.
void renumber_bfs(RawAutomaton& a) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(a.num_states));
    std::vector<BuchiTransition> sorted = a.transitions;
    std::sort(sorted.begin(), sorted.end(), [](const BuchiTransition& x, const BuchiTransition& y) {
        return std::tie(x.from, x.guard.positive, x.guard.negative, x.to) <
               std::tie(y.from, y.guard.positive, y.guard.negative, y.to);
    });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out[static_cast<std::size_t>(sorted[i].from)].push_back(static_cast<int>(i));
    }
    std::vector<int> remap(static_cast<std::size_t>(a.num_states), -1);
    int next = 0;
    std::deque<int> queue{a.initial};
    remap[static_cast<std::size_t>(a.initial)] = next++;
    while (!queue.empty()) {
        int q = queue.front();
        queue.pop_front();
        for (int ti : out[static_cast<std::size_t>(q)]) {
            int to = sorted[static_cast<std::size_t>(ti)].to;
            if (remap[static_cast<std::size_t>(to)] == -1) {
                remap[static_cast<std::size_t>(to)] = next++;
                queue.push_back(to);
            }
        }
    }
    std::vector<char> acc(static_cast<std::size_t>(a.num_states), 0);
    for (int q = 0; q < a.num_states; ++q) {
        acc[static_cast<std::size_t>(remap[static_cast<std::size_t>(q)])] =
            a.accepting[static_cast<std::size_t>(q)];
    }
    for (auto& t : a.transitions) {
        t.from = remap[static_cast<std::size_t>(t.from)];
        t.to = remap[static_cast<std::size_t>(t.to)];
    }
    dedupe_transitions(a.transitions);
    a.initial = 0;
    a.accepting = std::move(acc);
}

}  // namespace

BuchiAutomaton ltl_to_buchi(const LtlPtr& f, const TranslationLimits& limits) {
    if (!f) throw std::invalid_argument("ltl_to_buchi: null formula");
    LtlPtr nnf = negation_normal_form(f);

    NnfArena arena;
    int root = arena.intern(*nnf);
    TableauBuilder builder(arena, limits.max_states);
    std::vector<TableauNode> nodes = builder.build(root);

    // State 0 is the virtual initial state; tableau node k becomes k+1.
    RawAutomaton raw;
    raw.num_states = static_cast<int>(nodes.size()) + 1;
    raw.initial = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        TransitionGuard g = guard_of(arena, nodes[k].old);
        for (int inc : nodes[k].incoming) {
            raw.transitions.push_back({inc + 1, static_cast<int>(k) + 1, g});
        }
    }
    dedupe_transitions(raw.transitions);

    // Generalized acceptance: one set per Until subformula, then a counter
    // product to a single set.
    const auto& untils = arena.untils();
    std::vector<std::vector<char>> sets;
    for (int u : untils) {
        int rhs = arena.at(u).right;
        std::vector<char> in_set(static_cast<std::size_t>(raw.num_states), 0);
        in_set[0] = 1;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (!nodes[k].old.count(u) || nodes[k].old.count(rhs)) in_set[k + 1] = 1;
        }
        sets.push_back(std::move(in_set));
    }

    if (sets.empty()) {
        raw.accepting.assign(static_cast<std::size_t>(raw.num_states), 1);
    } else if (sets.size() == 1) {
        raw.accepting = sets[0];
    } else {
        int k = static_cast<int>(sets.size());
        int base = raw.num_states;
        RawAutomaton deg;
        deg.num_states = base * k;
        deg.initial = raw.initial * k;
        deg.accepting.assign(static_cast<std::size_t>(deg.num_states), 0);
        for (int q = 0; q < base; ++q) {
            if (sets[0][static_cast<std::size_t>(q)]) deg.accepting[static_cast<std::size_t>(q) * static_cast<std::size_t>(k)] = 1;
        }
        for (const auto& t : raw.transitions) {
            for (int i = 0; i < k; ++i) {
                int j = sets[static_cast<std::size_t>(i)][static_cast<std::size_t>(t.from)] ? (i + 1) % k : i;
                deg.transitions.push_back({t.from * k + i, t.to * k + j, t.guard});
            }
        }
        raw = std::move(deg);
    }

    drop_unreachable(raw);
    quotient_states(raw);
    renumber_bfs(raw);

    std::vector<int> accepting;
    for (int q = 0; q < raw.num_states; ++q) {
        if (raw.accepting[static_cast<std::size_t>(q)]) accepting.push_back(q);
    }
    return BuchiAutomaton(f->alphabet(), raw.num_states, raw.initial, std::move(accepting),
                          std::move(raw.transitions));
}

// ---------------------------------------------------------------------------
// SCCs and the accepting-reach set
// ---------------------------------------------------------------------------

namespace {

// Iterative Tarjan; returns component id per vertex.
struct SccResult {
    std::vector<int> comp;
    int count = 0;
};

SccResult tarjan_scc(int n, const std::vector<std::vector<int>>& adj) {
    SccResult res;
    res.comp.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> index(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    int next_index = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    for (int start = 0; start < n; ++start) {
        if (index[static_cast<std::size_t>(start)] != -1) continue;
        std::vector<Frame> call{{start, 0}};
        index[static_cast<std::size_t>(start)] = low[static_cast<std::size_t>(start)] = next_index++;
        stack.push_back(start);
        on_stack[static_cast<std::size_t>(start)] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto& edges = adj[static_cast<std::size_t>(f.v)];
            if (f.child < edges.size()) {
                int w = edges[f.child++];
                if (index[static_cast<std::size_t>(w)] == -1) {
                    index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<std::size_t>(w)] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[static_cast<std::size_t>(w)]) {
                    low[static_cast<std::size_t>(f.v)] =
                        std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
                }
            } else {
                if (low[static_cast<std::size_t>(f.v)] == index[static_cast<std::size_t>(f.v)]) {
                    for (;;) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<std::size_t>(w)] = 0;
                        res.comp[static_cast<std::size_t>(w)] = res.count;
                        if (w == f.v) break;
                    }
                    ++res.count;
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) {
                    int p = call.back().v;
                    low[static_cast<std::size_t>(p)] =
                        std::min(low[static_cast<std::size_t>(p)], low[static_cast<std::size_t>(v)]);
                }
            }
        }
    }
    return res;
}

}  // namespace

std::vector<int> accepting_reach_set(const BuchiAutomaton& a) {
    int n = a.num_states();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> radj(static_cast<std::size_t>(n));
    for (const auto& t : a.transitions()) {
        adj[static_cast<std::size_t>(t.from)].push_back(t.to);
        radj[static_cast<std::size_t>(t.to)].push_back(t.from);
    }
    SccResult scc = tarjan_scc(n, adj);

    std::vector<int> scc_size(static_cast<std::size_t>(scc.count), 0);
    for (int v = 0; v < n; ++v) ++scc_size[static_cast<std::size_t>(scc.comp[static_cast<std::size_t>(v)])];
    std::vector<char> has_self(static_cast<std::size_t>(n), 0);
    for (const auto& t : a.transitions()) {
        if (t.from == t.to) has_self[static_cast<std::size_t>(t.from)] = 1;
    }

    // An SCC qualifies if it holds an accepting state and an internal cycle.
    std::vector<char> live(static_cast<std::size_t>(n), 0);
    std::deque<int> queue;
    for (int v = 0; v < n; ++v) {
        if (!a.is_accepting(v)) continue;
        int c = scc.comp[static_cast<std::size_t>(v)];
        if (scc_size[static_cast<std::size_t>(c)] >= 2 || has_self[static_cast<std::size_t>(v)]) {
            if (!live[static_cast<std::size_t>(v)]) {
                live[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int p : radj[static_cast<std::size_t>(v)]) {
            if (!live[static_cast<std::size_t>(p)]) {
                live[static_cast<std::size_t>(p)] = 1;
                queue.push_back(p);
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < n; ++v) {
        if (live[static_cast<std::size_t>(v)]) out.push_back(v);
    }
    return out;
}

bool accepts_lasso(const BuchiAutomaton& a, const LassoWord& w) {
    if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
    const int positions = static_cast<int>(w.positions());
    const int n = a.num_states() * positions;
    auto id = [&](int q, int pos) { return q * positions + pos; };
    auto succ = [&](int pos) {
        return pos + 1 < positions ? pos + 1 : static_cast<int>(w.stem.size());
    };

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& t : a.transitions()) {
        for (int pos = 0; pos < positions; ++pos) {
            if (t.guard.admits(w.at(static_cast<std::size_t>(pos)))) {
                adj[static_cast<std::size_t>(id(t.from, pos))].push_back(id(t.to, succ(pos)));
            }
        }
    }

    // Reachability from (initial, 0).
    std::vector<char> reach(static_cast<std::size_t>(n), 0);
    std::deque<int> queue{id(a.initial(), 0)};
    reach[static_cast<std::size_t>(id(a.initial(), 0))] = 1;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int x : adj[static_cast<std::size_t>(v)]) {
            if (!reach[static_cast<std::size_t>(x)]) {
                reach[static_cast<std::size_t>(x)] = 1;
                queue.push_back(x);
            }
        }
    }

    SccResult scc = tarjan_scc(n, adj);
    std::vector<int> scc_size(static_cast<std::size_t>(scc.count), 0);
    for (int v = 0; v < n; ++v) ++scc_size[static_cast<std::size_t>(scc.comp[static_cast<std::size_t>(v)])];
    std::vector<char> self(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        for (int x : adj[static_cast<std::size_t>(v)]) {
            if (x == v) self[static_cast<std::size_t>(v)] = 1;
        }
    }
    for (int v = 0; v < n; ++v) {
        if (!reach[static_cast<std::size_t>(v)]) continue;
        int q = v / positions;
        if (!a.is_accepting(q)) continue;
        int c = scc.comp[static_cast<std::size_t>(v)];
        if (scc_size[static_cast<std::size_t>(c)] >= 2 || self[static_cast<std::size_t>(v)]) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Monitor
// ---------------------------------------------------------------------------

MonitorNfa MonitorNfa::from_automaton(BuchiAutomaton a) {
    MonitorNfa m;
    m.automaton_ = std::make_shared<const BuchiAutomaton>(std::move(a));
    m.live_mask_.assign(static_cast<std::size_t>(m.automaton_->num_states()), 0);
    for (int q : accepting_reach_set(*m.automaton_)) {
        m.live_mask_[static_cast<std::size_t>(q)] = 1;
    }
    return m;
}

MonitorNfa MonitorNfa::for_formula(const LtlPtr& f, const TranslationLimits& limits) {
    return from_automaton(ltl_to_buchi(f, limits));
}

std::vector<int> MonitorNfa::live_states() const {
    std::vector<int> out;
    for (int q = 0; q < automaton_->num_states(); ++q) {
        if (live_mask_[static_cast<std::size_t>(q)]) out.push_back(q);
    }
    return out;
}

Verdict run_monitor(const MonitorNfa& m, std::span<const AlphabetSymbol> trace) {
    const BuchiAutomaton& a = m.automaton();
    std::vector<char> current(static_cast<std::size_t>(a.num_states()), 0);
    if (m.is_live(a.initial())) current[static_cast<std::size_t>(a.initial())] = 1;

    std::vector<char> next(current.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::fill(next.begin(), next.end(), 0);
        bool any = false;
        for (int q = 0; q < a.num_states(); ++q) {
            if (!current[static_cast<std::size_t>(q)]) continue;
            for (int ti : a.outgoing(q)) {
                const auto& t = a.transitions()[static_cast<std::size_t>(ti)];
                if (t.guard.admits(trace[i]) && m.is_live(t.to)) {
                    next[static_cast<std::size_t>(t.to)] = 1;
                    any = true;
                }
            }
        }
        if (!any) return Verdict::bad_prefix(i);
        current.swap(next);
    }
    return Verdict::undetermined();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string BuchiAutomaton::to_json() const {
    nlohmann::json j;
    j["alphabet"] = nlohmann::json::array();
    for (const auto& p : alphabet_->props()) j["alphabet"].push_back(p.name);
    j["states"] = num_states_;
    j["initial"] = initial_;
    j["accepting"] = accepting_states();
    auto ts = nlohmann::json::array();
    for (const auto& t : transitions_) {
        nlohmann::json tj;
        tj["from"] = t.from;
        tj["to"] = t.to;
        tj["pos"] = symbol_names(*alphabet_, AlphabetSymbol{t.guard.positive});
        tj["neg"] = symbol_names(*alphabet_, AlphabetSymbol{t.guard.negative});
        ts.push_back(std::move(tj));
    }
    j["transitions"] = std::move(ts);
    return j.dump(2);
}

BuchiAutomaton BuchiAutomaton::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    auto alphabet = Alphabet::make(j.at("alphabet").get<std::vector<std::string>>());
    int states = j.at("states").get<int>();
    int initial = j.at("initial").get<int>();
    auto accepting = j.at("accepting").get<std::vector<int>>();
    std::vector<BuchiTransition> transitions;
    for (const auto& tj : j.at("transitions")) {
        BuchiTransition t;
        t.from = tj.at("from").get<int>();
        t.to = tj.at("to").get<int>();
        t.guard.positive = symbol_of(*alphabet, tj.at("pos").get<std::vector<std::string>>()).bits;
        t.guard.negative = symbol_of(*alphabet, tj.at("neg").get<std::vector<std::string>>()).bits;
        transitions.push_back(t);
    }
    return BuchiAutomaton(std::move(alphabet), states, initial, std::move(accepting),
                          std::move(transitions));
}

std::string BuchiAutomaton::dump() const {
    std::ostringstream os;
    os << "buchi: " << num_states_ << " states, " << transitions_.size()
       << " transitions, initial q" << initial_ << "\n";
    for (int q = 0; q < num_states_; ++q) {
        os << "q" << q << (is_accepting(q) ? " [accepting]" : "") << "\n";
        for (int ti : outgoing(q)) {
            const auto& t = transitions_[static_cast<std::size_t>(ti)];
            os << "  --(";
            bool first = true;
            for (const auto& n : symbol_names(*alphabet_, AlphabetSymbol{t.guard.positive})) {
                os << (first ? "" : " ") << "+" << n;
                first = false;
            }
            for (const auto& n : symbol_names(*alphabet_, AlphabetSymbol{t.guard.negative})) {
                os << (first ? "" : " ") << "-" << n;
                first = false;
            }
            if (first) os << "true";
            os << ")--> q" << t.to << "\n";
        }
    }
    return os.str();
}

}  // namespace ltlgrid
