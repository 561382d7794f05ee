#include "ltlgrid/alphabet.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>


namespace ltlgrid {

namespace {

bool valid_identifier(std::string_view name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool reserved_word(std::string_view name) {
    return name == "true" || name == "false" || name == "X" || name == "U" ||
           name == "R" || name == "F" || name == "G";
}

}  // namespace

Alphabet::Alphabet(std::vector<std::string> names) {
    if (names.size() > 64) {
        throw std::invalid_argument("alphabet limited to 64 propositions");
    }
    props_.reserve(names.size());
    for (auto& name : names) {
        if (!valid_identifier(name)) {
            throw std::invalid_argument("invalid proposition name: '" + name + "'");
        }
        if (reserved_word(name)) {
            throw std::invalid_argument("proposition name is a grammar keyword: '" + name + "'");
        }
        for (const auto& prior : props_) {
            if (prior.name == name) {
                throw std::invalid_argument("duplicate proposition name: '" + name + "'");
            }
        }
        props_.push_back({std::move(name), static_cast<int>(props_.size())});
    }
}

std::shared_ptr<const Alphabet> Alphabet::make(std::vector<std::string> names) {
    return std::make_shared<const Alphabet>(std::move(names));
}

const Proposition& Alphabet::prop(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("proposition id out of range");
    return props_[static_cast<std::size_t>(id)];
}

std::optional<int> Alphabet::find(std::string_view name) const {
    for (const auto& p : props_) {
        if (p.name == name) return p.id;
    }
    return std::nullopt;
}

AlphabetSymbol symbol_of(const Alphabet& alphabet, const std::vector<std::string>& names) {
    AlphabetSymbol s;
    for (const auto& n : names) {
        auto id = alphabet.find(n);
        if (!id) throw std::invalid_argument("unknown proposition: '" + n + "'");
        s.set(*id);
    }
    return s;
}

std::vector<std::string> symbol_names(const Alphabet& alphabet, AlphabetSymbol s) {
    std::vector<std::string> out;
    for (int i = 0; i < alphabet.size(); ++i) {
        if (s.contains(i)) out.push_back(alphabet.prop(i).name);
    }
    return out;
}

}  // namespace ltlgrid
