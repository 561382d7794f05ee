#include "ltlgrid/ltl.hpp"

#include <cassert>
#include <cctype>
#include <unordered_map>

namespace ltlgrid {

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

LtlPtr LtlFormula::node(LtlOp op, AlphabetPtr a, int atom, LtlPtr l, LtlPtr r) {
    if (!a) throw std::invalid_argument("formula requires an alphabet");
    if (l && l->alphabet() != a) throw std::invalid_argument("child alphabet mismatch");
    if (r && r->alphabet() != a) throw std::invalid_argument("child alphabet mismatch");
    return LtlPtr(new LtlFormula(op, std::move(a), atom, std::move(l), std::move(r)));
}

LtlPtr LtlFormula::True(AlphabetPtr a) { return node(LtlOp::True, std::move(a), -1, nullptr, nullptr); }
LtlPtr LtlFormula::False(AlphabetPtr a) { return node(LtlOp::False, std::move(a), -1, nullptr, nullptr); }

LtlPtr LtlFormula::Atom(AlphabetPtr a, int prop_id) {
    if (!a) throw std::invalid_argument("formula requires an alphabet");
    a->prop(prop_id);  // range check
    return node(LtlOp::Atom, std::move(a), prop_id, nullptr, nullptr);
}

LtlPtr LtlFormula::Atom(AlphabetPtr a, std::string_view name) {
    if (!a) throw std::invalid_argument("formula requires an alphabet");
    auto id = a->find(name);
    if (!id) throw std::invalid_argument("unknown proposition: '" + std::string(name) + "'");
    return Atom(std::move(a), *id);
}

LtlPtr LtlFormula::Not(LtlPtr f) {
    auto a = f->alphabet();
    return node(LtlOp::Not, a, -1, std::move(f), nullptr);
}
LtlPtr LtlFormula::And(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::And, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Or(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::Or, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Implies(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::Implies, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Iff(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::Iff, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Next(LtlPtr f) {
    auto a = f->alphabet();
    return node(LtlOp::Next, a, -1, std::move(f), nullptr);
}
LtlPtr LtlFormula::Until(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::Until, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Release(LtlPtr l, LtlPtr r) {
    auto a = l->alphabet();
    return node(LtlOp::Release, a, -1, std::move(l), std::move(r));
}
LtlPtr LtlFormula::Eventually(LtlPtr f) {
    auto a = f->alphabet();
    return Until(True(a), std::move(f));
}
LtlPtr LtlFormula::Always(LtlPtr f) {
    auto a = f->alphabet();
    return Not(Until(True(a), Not(std::move(f))));
}

bool LtlFormula::equals(const LtlFormula& other) const {
    if (op_ != other.op_ || atom_ != other.atom_) return false;
    if (static_cast<bool>(left_) != static_cast<bool>(other.left_)) return false;
    if (static_cast<bool>(right_) != static_cast<bool>(other.right_)) return false;
    if (left_ && !left_->equals(*other.left_)) return false;
    if (right_ && !right_->equals(*other.right_)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

// Precedence, loosest to tightest: <-> (0), -> (1), | (2), & (3), U/R (4),
// unary (5), primary (6).
int precedence_of(LtlOp op) {
    switch (op) {
        case LtlOp::Iff: return 0;
        case LtlOp::Implies: return 1;
        case LtlOp::Or: return 2;
        case LtlOp::And: return 3;
        case LtlOp::Until:
        case LtlOp::Release: return 4;
        case LtlOp::Not:
        case LtlOp::Next: return 5;
        default: return 6;
    }
}

bool is_true(const LtlFormula& f) { return f.op() == LtlOp::True; }

// `true U x`: rendered as F x.
const LtlFormula* eventually_body(const LtlFormula& f) {
    if (f.op() == LtlOp::Until && is_true(*f.left())) return f.right().get();
    return nullptr;
}

// `!(true U !x)`: rendered as G x.
const LtlFormula* always_body(const LtlFormula& f) {
    if (f.op() != LtlOp::Not) return nullptr;
    const LtlFormula& inner = *f.left();
    if (inner.op() != LtlOp::Until || !is_true(*inner.left())) return nullptr;
    if (inner.right()->op() != LtlOp::Not) return nullptr;
    return inner.right()->left().get();
}

void print_rec(const LtlFormula& f, int min_prec, std::string& out) {
    if (const LtlFormula* body = always_body(f)) {
        if (min_prec > 5) out += '(';
        out += "G ";
        print_rec(*body, 5, out);
        if (min_prec > 5) out += ')';
        return;
    }
    if (const LtlFormula* body = eventually_body(f)) {
        if (min_prec > 5) out += '(';
        out += "F ";
        print_rec(*body, 5, out);
        if (min_prec > 5) out += ')';
        return;
    }

    int prec = precedence_of(f.op());
    bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (f.op()) {
        case LtlOp::True: out += "true"; break;
        case LtlOp::False: out += "false"; break;
        case LtlOp::Atom: out += f.alphabet()->prop(f.atom_id()).name; break;
        case LtlOp::Not:
            out += '!';
            print_rec(*f.left(), 5, out);
            break;
        case LtlOp::Next:
            out += "X ";
            print_rec(*f.left(), 5, out);
            break;
        case LtlOp::And:  // left-associative
            print_rec(*f.left(), 3, out);
            out += " & ";
            print_rec(*f.right(), 4, out);
            break;
        case LtlOp::Or:
            print_rec(*f.left(), 2, out);
            out += " | ";
            print_rec(*f.right(), 3, out);
            break;
        case LtlOp::Implies:  // right-associative
            print_rec(*f.left(), 2, out);
            out += " -> ";
            print_rec(*f.right(), 1, out);
            break;
        case LtlOp::Iff:
            print_rec(*f.left(), 1, out);
            out += " <-> ";
            print_rec(*f.right(), 0, out);
            break;
        case LtlOp::Until:
            print_rec(*f.left(), 5, out);
            out += " U ";
            print_rec(*f.right(), 4, out);
            break;
        case LtlOp::Release:
            print_rec(*f.left(), 5, out);
            out += " R ";
            print_rec(*f.right(), 4, out);
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string LtlFormula::to_string() const {
    std::string out;
    print_rec(*this, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
    End, LParen, RParen, LBrace, RBrace, Comma,
    Not, And, Or, Implies, Iff,
    Next, Until, Release, Eventually, Always,
    True, False, Ident,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        std::size_t start = i_;
        if (i_ >= text_.size()) return {Tok::End, "", start};
        char c = text_[i_];
        switch (c) {
            case '(': ++i_; return {Tok::LParen, "(", start};
            case ')': ++i_; return {Tok::RParen, ")", start};
            case '{': ++i_; return {Tok::LBrace, "{", start};
            case '}': ++i_; return {Tok::RBrace, "}", start};
            case ',': ++i_; return {Tok::Comma, ",", start};
            case '!': ++i_; return {Tok::Not, "!", start};
            case '&': ++i_; return {Tok::And, "&", start};
            case '|': ++i_; return {Tok::Or, "|", start};
            case '-':
                if (i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
                    i_ += 2;
                    return {Tok::Implies, "->", start};
                }
                throw ParseError("expected '->'", start);
            case '<':
                if (i_ + 2 < text_.size() && text_[i_ + 1] == '-' && text_[i_ + 2] == '>') {
                    i_ += 3;
                    return {Tok::Iff, "<->", start};
                }
                throw ParseError("expected '<->'", start);
            default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
                ++j;
            }
            std::string word(text_.substr(i_, j - i_));
            i_ = j;
            if (word == "true") return {Tok::True, word, start};
            if (word == "false") return {Tok::False, word, start};
            if (word == "X") return {Tok::Next, word, start};
            if (word == "U") return {Tok::Until, word, start};
            if (word == "R") return {Tok::Release, word, start};
            if (word == "F") return {Tok::Eventually, word, start};
            if (word == "G") return {Tok::Always, word, start};
            return {Tok::Ident, word, start};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }

private:
    std::string_view text_;
    std::size_t i_ = 0;
};

class Parser {
public:
    Parser(std::string_view text, AlphabetPtr alphabet)
        : lex_(text), alphabet_(std::move(alphabet)) {
        advance();
    }

    LtlPtr parse() {
        LtlPtr f = parse_iff();
        if (cur_.kind != Tok::End) {
            throw ParseError("unexpected trailing input '" + cur_.text + "'", cur_.pos);
        }
        return f;
    }

private:
    void advance() { cur_ = lex_.next(); }

    bool accept(Tok k) {
        if (cur_.kind != k) return false;
        advance();
        return true;
    }

    void expect(Tok k, const char* what) {
        if (!accept(k)) {
            throw ParseError(std::string("expected ") + what + " before '" + cur_.text + "'",
                             cur_.pos);
        }
    }

    LtlPtr parse_iff() {
        LtlPtr l = parse_implies();
        if (accept(Tok::Iff)) return LtlFormula::Iff(std::move(l), parse_iff());
        return l;
    }

    LtlPtr parse_implies() {
        LtlPtr l = parse_or();
        if (accept(Tok::Implies)) return LtlFormula::Implies(std::move(l), parse_implies());
        return l;
    }

    LtlPtr parse_or() {
        LtlPtr l = parse_and();
        while (accept(Tok::Or)) l = LtlFormula::Or(std::move(l), parse_and());
        return l;
    }

    LtlPtr parse_and() {
        LtlPtr l = parse_until();
        while (accept(Tok::And)) l = LtlFormula::And(std::move(l), parse_until());
        return l;
    }

    LtlPtr parse_until() {
        LtlPtr l = parse_unary();
        if (accept(Tok::Until)) return LtlFormula::Until(std::move(l), parse_until());
        if (accept(Tok::Release)) return LtlFormula::Release(std::move(l), parse_until());
        return l;
    }

    LtlPtr parse_unary() {
        if (accept(Tok::Not)) return LtlFormula::Not(parse_unary());
        if (accept(Tok::Next)) return LtlFormula::Next(parse_unary());
        if (accept(Tok::Eventually)) return LtlFormula::Eventually(parse_unary());
        if (accept(Tok::Always)) return LtlFormula::Always(parse_unary());
        return parse_primary();
    }

    LtlPtr parse_primary() {
        if (cur_.kind == Tok::True) {
            advance();
            return LtlFormula::True(alphabet_);
        }
        if (cur_.kind == Tok::False) {
            advance();
            return LtlFormula::False(alphabet_);
        }
        if (cur_.kind == Tok::Ident) {
            auto id = alphabet_->find(cur_.text);
            if (!id) throw ParseError("unknown proposition '" + cur_.text + "'", cur_.pos);
            advance();
            return LtlFormula::Atom(alphabet_, *id);
        }
        if (accept(Tok::LParen)) {
            LtlPtr f = parse_iff();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (accept(Tok::LBrace)) {
            // {p,q,...}: conjunction of the member propositions.
            if (accept(Tok::RBrace)) return LtlFormula::True(alphabet_);
            LtlPtr f = parse_brace_atom();
            while (accept(Tok::Comma)) {
                f = LtlFormula::And(std::move(f), parse_brace_atom());
            }
            expect(Tok::RBrace, "'}'");
            return f;
        }
        throw ParseError("expected a formula before '" + cur_.text + "'", cur_.pos);
    }

    LtlPtr parse_brace_atom() {
        if (cur_.kind != Tok::Ident) {
            throw ParseError("expected proposition name in '{...}'", cur_.pos);
        }
        auto id = alphabet_->find(cur_.text);
        if (!id) throw ParseError("unknown proposition '" + cur_.text + "'", cur_.pos);
        advance();
        return LtlFormula::Atom(alphabet_, *id);
    }

    Lexer lex_;
    Token cur_{Tok::End, "", 0};
    AlphabetPtr alphabet_;
};

}  // namespace

LtlPtr parse_ltl(std::string_view text, AlphabetPtr alphabet) {
    if (!alphabet) throw std::invalid_argument("parse_ltl requires an alphabet");
    return Parser(text, std::move(alphabet)).parse();
}

std::vector<std::string> extract_atom_names(std::string_view text) {
    Lexer lex(text);
    std::vector<std::string> names;
    for (Token t = lex.next(); t.kind != Tok::End; t = lex.next()) {
        if (t.kind != Tok::Ident) continue;
        bool seen = false;
        for (const auto& n : names) {
            if (n == t.text) { seen = true; break; }
        }
        if (!seen) names.push_back(t.text);
    }
    return names;
}

// ---------------------------------------------------------------------------
// Rewrites
// ---------------------------------------------------------------------------

LtlPtr desugar(const LtlPtr& f) {
    using F = LtlFormula;
    switch (f->op()) {
        case LtlOp::True:
        case LtlOp::Atom:
            return f;
        case LtlOp::False:
            return F::Not(F::True(f->alphabet()));
        case LtlOp::Not:
            return F::Not(desugar(f->left()));
        case LtlOp::Or:
            return F::Or(desugar(f->left()), desugar(f->right()));
        case LtlOp::Next:
            return F::Next(desugar(f->left()));
        case LtlOp::Until:
            return F::Until(desugar(f->left()), desugar(f->right()));
        case LtlOp::And: {
            auto l = desugar(f->left());
            auto r = desugar(f->right());
            return F::Not(F::Or(F::Not(std::move(l)), F::Not(std::move(r))));
        }
        case LtlOp::Implies:
            return F::Or(F::Not(desugar(f->left())), desugar(f->right()));
        case LtlOp::Iff: {
            auto fw = F::Implies(f->left(), f->right());
            auto bw = F::Implies(f->right(), f->left());
            return desugar(F::And(std::move(fw), std::move(bw)));
        }
        case LtlOp::Release: {
            auto l = desugar(f->left());
            auto r = desugar(f->right());
            return F::Not(F::Until(F::Not(std::move(l)), F::Not(std::move(r))));
        }
    }
    throw std::logic_error("desugar: unhandled operator");
}

namespace {

LtlPtr nnf_pos(const LtlPtr& f);
LtlPtr nnf_neg(const LtlPtr& f);

LtlPtr nnf_pos(const LtlPtr& f) {
    using F = LtlFormula;
    switch (f->op()) {
        case LtlOp::True:
        case LtlOp::False:
        case LtlOp::Atom:
            return f;
        case LtlOp::Not:
            return nnf_neg(f->left());
        case LtlOp::And:
            return F::And(nnf_pos(f->left()), nnf_pos(f->right()));
        case LtlOp::Or:
            return F::Or(nnf_pos(f->left()), nnf_pos(f->right()));
        case LtlOp::Implies:
            return F::Or(nnf_neg(f->left()), nnf_pos(f->right()));
        case LtlOp::Iff:
            return F::Or(F::And(nnf_pos(f->left()), nnf_pos(f->right())),
                         F::And(nnf_neg(f->left()), nnf_neg(f->right())));
        case LtlOp::Next:
            return F::Next(nnf_pos(f->left()));
        case LtlOp::Until:
            return F::Until(nnf_pos(f->left()), nnf_pos(f->right()));
        case LtlOp::Release:
            return F::Release(nnf_pos(f->left()), nnf_pos(f->right()));
    }
    throw std::logic_error("nnf: unhandled operator");
}

LtlPtr nnf_neg(const LtlPtr& f) {
    using F = LtlFormula;
    switch (f->op()) {
        case LtlOp::True:
            return F::False(f->alphabet());
        case LtlOp::False:
            return F::True(f->alphabet());
        case LtlOp::Atom:
            return F::Not(f);
        case LtlOp::Not:
            return nnf_pos(f->left());
        case LtlOp::And:
            return F::Or(nnf_neg(f->left()), nnf_neg(f->right()));
        case LtlOp::Or:
            return F::And(nnf_neg(f->left()), nnf_neg(f->right()));
        case LtlOp::Implies:
            return F::And(nnf_pos(f->left()), nnf_neg(f->right()));
        case LtlOp::Iff:
            return F::Or(F::And(nnf_pos(f->left()), nnf_neg(f->right())),
                         F::And(nnf_neg(f->left()), nnf_pos(f->right())));
        case LtlOp::Next:
            return F::Next(nnf_neg(f->left()));
        case LtlOp::Until:
            return F::Release(nnf_neg(f->left()), nnf_neg(f->right()));
        case LtlOp::Release:
            return F::Until(nnf_neg(f->left()), nnf_neg(f->right()));
    }
    throw std::logic_error("nnf: unhandled operator");
}

}  // namespace

LtlPtr negation_normal_form(const LtlPtr& f) { return nnf_pos(f); }

// ---------------------------------------------------------------------------
// Lasso-word satisfaction
// ---------------------------------------------------------------------------

LassoWord shift(const LassoWord& w) {
    if (!w.stem.empty()) {
        LassoWord out;
        out.stem.assign(w.stem.begin() + 1, w.stem.end());
        out.loop = w.loop;
        return out;
    }
    LassoWord out;
    out.loop.assign(w.loop.begin() + 1, w.loop.end());
    out.loop.push_back(w.loop.front());
    return out;
}

namespace {

// Truth of each subformula at each of the N distinct positions; Until and
// Release are solved as least/greatest fixpoints on the stem+cycle chain.
class LassoEval {
public:
    explicit LassoEval(const LassoWord& w) : w_(w), n_(w.positions()) {
        if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
    }

    const std::vector<char>& eval(const LtlFormula& f) {
        auto it = memo_.find(&f);
        if (it != memo_.end()) return it->second;
        std::vector<char> v(n_, 0);
        switch (f.op()) {
            case LtlOp::True:
                v.assign(n_, 1);
                break;
            case LtlOp::False:
                break;
            case LtlOp::Atom:
                for (std::size_t i = 0; i < n_; ++i) v[i] = w_.at(i).contains(f.atom_id());
                break;
            case LtlOp::Not: {
                const auto& a = eval(*f.left());
                for (std::size_t i = 0; i < n_; ++i) v[i] = !a[i];
                break;
            }
            case LtlOp::And: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                for (std::size_t i = 0; i < n_; ++i) v[i] = a[i] && b[i];
                break;
            }
            case LtlOp::Or: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                for (std::size_t i = 0; i < n_; ++i) v[i] = a[i] || b[i];
                break;
            }
            case LtlOp::Implies: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                for (std::size_t i = 0; i < n_; ++i) v[i] = !a[i] || b[i];
                break;
            }
            case LtlOp::Iff: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                for (std::size_t i = 0; i < n_; ++i) v[i] = a[i] == b[i];
                break;
            }
            case LtlOp::Next: {
                const auto& a = eval(*f.left());
                for (std::size_t i = 0; i < n_; ++i) v[i] = a[succ(i)];
                break;
            }
            case LtlOp::Until: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                v = b;  // least fixpoint of v = b | (a & X v)
                for (bool changed = true; changed;) {
                    changed = false;
                    for (std::size_t i = n_; i-- > 0;) {
                        char nv = b[i] || (a[i] && v[succ(i)]);
                        if (nv != v[i]) {
                            v[i] = nv;
                            changed = true;
                        }
                    }
                }
                break;
            }
            case LtlOp::Release: {
                const auto& a = eval(*f.left());
                const auto& b = eval(*f.right());
                v.assign(n_, 1);  // greatest fixpoint of v = b & (a | X v)
                for (bool changed = true; changed;) {
                    changed = false;
                    for (std::size_t i = n_; i-- > 0;) {
                        char nv = b[i] && (a[i] || v[succ(i)]);
                        if (nv != v[i]) {
                            v[i] = nv;
                            changed = true;
                        }
                    }
                }
                break;
            }
        }
        return memo_.emplace(&f, std::move(v)).first->second;
    }

private:
    std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : w_.stem.size(); }

    const LassoWord& w_;
    std::size_t n_;
    std::unordered_map<const LtlFormula*, std::vector<char>> memo_;
};

}  // namespace

bool satisfies_lasso(const LassoWord& w, const LtlPtr& f) {
    LassoEval ev(w);
    return ev.eval(*f)[0] != 0;
}

}  // namespace ltlgrid
