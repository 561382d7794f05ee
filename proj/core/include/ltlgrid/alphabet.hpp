#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ltlgrid {

/// One named boolean environment feature. Ids are dense indices assigned by
/// the owning Alphabet in declaration order.
struct Proposition {
    std::string name;
    int id = -1;
};

/// Immutable set of atomic propositions. At most 64 propositions so that a
/// truth assignment packs into a single word.
class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> names);

    static std::shared_ptr<const Alphabet> make(std::vector<std::string> names);

    int size() const { return static_cast<int>(props_.size()); }
    const Proposition& prop(int id) const;
    std::optional<int> find(std::string_view name) const;
    const std::vector<Proposition>& props() const { return props_; }

private:
    std::vector<Proposition> props_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

/// A subset of the alphabet: the propositions true at one trace step.
struct AlphabetSymbol {
    std::uint64_t bits = 0;

    bool contains(int id) const { return (bits >> id) & 1u; }
    void set(int id) { bits |= std::uint64_t{1} << id; }

    friend bool operator==(const AlphabetSymbol&, const AlphabetSymbol&) = default;
};

/// Builds a symbol from proposition names; throws on unknown names.
AlphabetSymbol symbol_of(const Alphabet& alphabet,
                         const std::vector<std::string>& names);

/// Names of the propositions contained in a symbol, in id order.
std::vector<std::string> symbol_names(const Alphabet& alphabet, AlphabetSymbol s);

}  // namespace ltlgrid
