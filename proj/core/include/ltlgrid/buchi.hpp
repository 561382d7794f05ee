#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltlgrid/ltl.hpp"

namespace ltlgrid {

/// Conjunction of literals over the alphabet: every proposition in
/// `positive` must hold and every proposition in `negative` must not.
struct TransitionGuard {
    std::uint64_t positive = 0;
    std::uint64_t negative = 0;

    bool admits(AlphabetSymbol s) const {
        return (s.bits & positive) == positive && (s.bits & negative) == 0;
    }
    bool satisfiable() const { return (positive & negative) == 0; }

    friend bool operator==(const TransitionGuard&, const TransitionGuard&) = default;
};

struct BuchiTransition {
    int from = 0;
    int to = 0;
    TransitionGuard guard;
};

/// Nondeterministic Buchi automaton with guard-labelled transitions.
class BuchiAutomaton {
public:
    BuchiAutomaton(AlphabetPtr alphabet, int num_states, int initial,
                   std::vector<int> accepting, std::vector<BuchiTransition> transitions);

    const AlphabetPtr& alphabet() const { return alphabet_; }
    int num_states() const { return num_states_; }
    int initial() const { return initial_; }
    bool is_accepting(int q) const { return accepting_mask_[static_cast<std::size_t>(q)] != 0; }
    std::vector<int> accepting_states() const;
    const std::vector<BuchiTransition>& transitions() const { return transitions_; }

    /// Transition indices leaving state q.
    std::span<const int> outgoing(int q) const;

    std::string to_json() const;
    static BuchiAutomaton from_json(const std::string& text);

    /// Human-readable listing for documentation and diffing.
    std::string dump() const;

private:
    AlphabetPtr alphabet_;
    int num_states_ = 0;
    int initial_ = 0;
    std::vector<char> accepting_mask_;
    std::vector<BuchiTransition> transitions_;
    std::vector<int> out_index_;    // transition ids grouped by source
    std::vector<int> out_offsets_;  // num_states_+1 offsets into out_index_
};

struct TranslationLimits {
    int max_states = 10000;
};

/// LTL to Buchi translation: on-the-fly tableau over the negation normal
/// form, degeneralized and then quotiented by identical outgoing behavior.
BuchiAutomaton ltl_to_buchi(const LtlPtr& f, const TranslationLimits& limits = {});

/// States from which some accepting run exists: everything that can reach a
/// cycle through an accepting state (an SCC with an internal transition,
/// self-loops included). Returned sorted.
std::vector<int> accepting_reach_set(const BuchiAutomaton& a);

/// Whether the automaton accepts stem . loop^omega.
bool accepts_lasso(const BuchiAutomaton& a, const LassoWord& w);

/// Monitor verdict for a finite trace.
class Verdict {
public:
    static Verdict undetermined() { return Verdict{}; }
    static Verdict bad_prefix(std::size_t index) {
        Verdict v;
        v.bad_ = index;
        return v;
    }

    bool is_bad_prefix() const { return bad_.has_value(); }
    std::size_t bad_index() const { return *bad_; }

    friend bool operator==(const Verdict&, const Verdict&) = default;

private:
    std::optional<std::size_t> bad_;
};

/// Safety monitor: the source automaton restricted to its live states.
/// A finite word is flagged as soon as no run over live states remains.
class MonitorNfa {
public:
    static MonitorNfa from_automaton(BuchiAutomaton a);
    static MonitorNfa for_formula(const LtlPtr& f, const TranslationLimits& limits = {});

    const BuchiAutomaton& automaton() const { return *automaton_; }
    bool is_live(int q) const { return live_mask_[static_cast<std::size_t>(q)] != 0; }
    std::vector<int> live_states() const;

private:
    std::shared_ptr<const BuchiAutomaton> automaton_;
    std::vector<char> live_mask_;
};

/// Runs the monitor over a finite trace. Returns BadPrefix(i) at the first
/// step i where the live reachable-state set becomes empty, else
/// Undetermined. Monotone: extensions of a bad prefix stay bad.
Verdict run_monitor(const MonitorNfa& m, std::span<const AlphabetSymbol> trace);

}  // namespace ltlgrid
