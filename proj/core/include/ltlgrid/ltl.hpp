#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ltlgrid/alphabet.hpp"

namespace ltlgrid {

enum class LtlOp : std::uint8_t {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Until,
    Release,
};

class LtlFormula;
using LtlPtr = std::shared_ptr<const LtlFormula>;

/// Immutable LTL syntax tree over a fixed alphabet.
///
/// Factories are the only way to build nodes; children must share one
/// alphabet. `Eventually(f)` and `Always(f)` construct their defining forms
/// `true U f` and `!(true U !f)`, and the printer renders those patterns as
/// `F f` / `G f`, so parse(to_string(f)) reproduces f exactly.
class LtlFormula : public std::enable_shared_from_this<LtlFormula> {
public:
    LtlOp op() const { return op_; }
    int atom_id() const { return atom_; }
    const LtlPtr& left() const { return left_; }
    const LtlPtr& right() const { return right_; }
    const AlphabetPtr& alphabet() const { return alphabet_; }

    bool equals(const LtlFormula& other) const;

    /// Precedence-aware rendering in the published grammar. `true U x` is
    /// printed canonically as `F x`.
    std::string to_string() const;

    static LtlPtr True(AlphabetPtr a);
    static LtlPtr False(AlphabetPtr a);
    static LtlPtr Atom(AlphabetPtr a, int prop_id);
    static LtlPtr Atom(AlphabetPtr a, std::string_view name);
    static LtlPtr Not(LtlPtr f);
    static LtlPtr And(LtlPtr l, LtlPtr r);
    static LtlPtr Or(LtlPtr l, LtlPtr r);
    static LtlPtr Implies(LtlPtr l, LtlPtr r);
    static LtlPtr Iff(LtlPtr l, LtlPtr r);
    static LtlPtr Next(LtlPtr f);
    static LtlPtr Until(LtlPtr l, LtlPtr r);
    static LtlPtr Release(LtlPtr l, LtlPtr r);
    static LtlPtr Eventually(LtlPtr f);
    static LtlPtr Always(LtlPtr f);

private:
    LtlFormula(LtlOp op, AlphabetPtr a, int atom, LtlPtr l, LtlPtr r)
        : op_(op), atom_(atom), alphabet_(std::move(a)),
          left_(std::move(l)), right_(std::move(r)) {}

    static LtlPtr node(LtlOp op, AlphabetPtr a, int atom, LtlPtr l, LtlPtr r);

    LtlOp op_;
    int atom_ = -1;
    AlphabetPtr alphabet_;
    LtlPtr left_;
    LtlPtr right_;
};

struct ParseError : std::runtime_error {
    ParseError(std::string msg, std::size_t pos)
        : std::runtime_error(std::move(msg)), position(pos) {}
    std::size_t position;
};

/// Parses the ASCII grammar: `true false ! & | -> <-> X U R F G`,
/// parentheses, identifiers, and `{p,q}` as sugar for `p & q`.
/// Precedence (tightest first): unary, U/R, &, |, ->, <->; U/R and the
/// implication operators associate to the right.
LtlPtr parse_ltl(std::string_view text, AlphabetPtr alphabet);

/// Identifier tokens of `text` that are not grammar keywords, in first-seen
/// order. Convenience for building an alphabet from a formula string.
std::vector<std::string> extract_atom_names(std::string_view text);

/// Rewrites to the core fragment {Atom, True, Not, Or, Next, Until}.
LtlPtr desugar(const LtlPtr& f);

/// Negation normal form over {And, Or, Next, Until, Release} with negation
/// only on atoms.
LtlPtr negation_normal_form(const LtlPtr& f);

/// Ultimately periodic word stem . loop^omega; the loop is nonempty.
struct LassoWord {
    std::vector<AlphabetSymbol> stem;
    std::vector<AlphabetSymbol> loop;

    std::size_t positions() const { return stem.size() + loop.size(); }
    AlphabetSymbol at(std::size_t i) const {
        return i < stem.size() ? stem[i] : loop[i - stem.size()];
    }
};

/// Drops the first letter: shift(stem w . rest) = rest as a lasso word.
LassoWord shift(const LassoWord& w);

/// Exact satisfaction of `f` on stem.loop^omega, by fixpoint evaluation over
/// the word's |stem|+|loop| distinct positions.
bool satisfies_lasso(const LassoWord& w, const LtlPtr& f);

}  // namespace ltlgrid
