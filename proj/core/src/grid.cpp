#include "ltlgrid/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ltlgrid {

// ---------------------------------------------------------------------------
// GridSpec
// ---------------------------------------------------------------------------

GridSpec::GridSpec(std::vector<std::pair<double, double>> bounds, int depth) : depth_(depth) {
    if (bounds.empty()) throw std::invalid_argument("grid needs at least one axis");
    if (depth < static_cast<int>(bounds.size()) || depth > 63) {
        throw std::invalid_argument("grid depth must be in [k, 63]");
    }
    const int k = static_cast<int>(bounds.size());
    for (auto [lo, hi] : bounds) {
        if (!(lo < hi)) throw std::invalid_argument("grid bounds must satisfy lo < hi");
        lo_.push_back(lo);
        hi_.push_back(hi);
    }
    bits_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        bits_[static_cast<std::size_t>(i)] = depth / k + (i < depth % k ? 1 : 0);
    }
}

std::uint64_t GridSpec::quantize(int axis, double x) const {
    const double lo = lower(axis);
    const double hi = upper(axis);
    if (!(x >= lo && x < hi)) {
        throw std::out_of_range("point outside workspace bounds");
    }
    const double z = (x - lo) / (hi - lo);
    // Multiplying by a power of two is exact; floor recovers the descent bits.
    double scaled = std::floor(z * static_cast<double>(axis_cells(axis)));
    auto c = static_cast<std::uint64_t>(scaled);
    if (c >= axis_cells(axis)) c = axis_cells(axis) - 1;
    return c;
}

std::pair<std::int64_t, std::int64_t> GridSpec::overlap_cells(int axis, double x_lo,
                                                              double x_hi) const {
    const double lo = lower(axis);
    const double hi = upper(axis);
    const auto cells = static_cast<double>(axis_cells(axis));
    const double z_lo = (x_lo - lo) / (hi - lo) * cells;
    const double z_hi = (x_hi - lo) / (hi - lo) * cells;
    auto first = static_cast<std::int64_t>(std::floor(z_lo));
    auto last = static_cast<std::int64_t>(std::ceil(z_hi)) - 1;
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, static_cast<std::int64_t>(axis_cells(axis)) - 1);
    return {first, last};
}

std::string GridSpec::to_json() const {
    nlohmann::json j;
    auto b = nlohmann::json::array();
    for (int i = 0; i < dims(); ++i) b.push_back({lower(i), upper(i)});
    j["bounds"] = std::move(b);
    j["depth"] = depth_;
    return j.dump(2);
}

GridSpec GridSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<std::pair<double, double>> bounds;
    for (const auto& b : j.at("bounds")) {
        bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    }
    return GridSpec(std::move(bounds), j.at("depth").get<int>());
}

// ---------------------------------------------------------------------------
// Z-order indexing
// ---------------------------------------------------------------------------

std::uint64_t z_index_of_cells(std::span<const std::uint64_t> cells, const GridSpec& g) {
    std::uint64_t index = 0;
    const int k = g.dims();
    for (int level = 0; level < g.depth(); ++level) {
        const int axis = level % k;
        const int axis_level = level / k;
        const int bit_pos = g.axis_bits(axis) - 1 - axis_level;
        index = (index << 1) | ((cells[static_cast<std::size_t>(axis)] >> bit_pos) & 1u);
    }
    return index;
}

void z_index_to_cells(std::uint64_t index, const GridSpec& g, std::span<std::uint64_t> cells) {
    const int k = g.dims();
    for (int axis = 0; axis < k; ++axis) cells[static_cast<std::size_t>(axis)] = 0;
    for (int level = 0; level < g.depth(); ++level) {
        const int axis = level % k;
        const std::uint64_t bit = (index >> (g.depth() - 1 - level)) & 1u;
        cells[static_cast<std::size_t>(axis)] =
            (cells[static_cast<std::size_t>(axis)] << 1) | bit;
    }
}

std::uint64_t z_index(std::span<const double> p, const GridSpec& g) {
    if (static_cast<int>(p.size()) != g.dims()) {
        throw std::invalid_argument("point dimension mismatch");
    }
    std::uint64_t cells[64];
    for (int i = 0; i < g.dims(); ++i) {
        cells[i] = g.quantize(i, p[static_cast<std::size_t>(i)]);
    }
    return z_index_of_cells({cells, static_cast<std::size_t>(g.dims())}, g);
}

std::uint64_t z_index_tree_descent(std::span<const double> p, const GridSpec& g) {
    if (static_cast<int>(p.size()) != g.dims()) {
        throw std::invalid_argument("point dimension mismatch");
    }
    const int k = g.dims();
    double z[64];
    double pivot[64];
    double step[64];
    for (int i = 0; i < k; ++i) {
        const double lo = g.lower(i);
        const double hi = g.upper(i);
        if (!(p[static_cast<std::size_t>(i)] >= lo && p[static_cast<std::size_t>(i)] < hi)) {
            throw std::out_of_range("point outside workspace bounds");
        }
        z[i] = (p[static_cast<std::size_t>(i)] - lo) / (hi - lo);
        pivot[i] = 0.5;
        step[i] = 0.25;
    }
    std::uint64_t n = 0;
    for (int level = 1; level <= g.depth(); ++level) {
        const int axis = (level - 1) % k;
        if (z[axis] >= pivot[axis]) {
            n += std::uint64_t{1} << (g.depth() - level);
            pivot[axis] += step[axis];
        } else {
            pivot[axis] -= step[axis];
        }
        step[axis] *= 0.5;
    }
    return n;
}

ZScatter::ZScatter(const GridSpec& g) {
    tables_.resize(static_cast<std::size_t>(g.dims()));
    for (int a = 0; a < g.dims(); ++a) {
        if (g.axis_bits(a) > 24) {
            throw std::invalid_argument("ZScatter supports at most 24 bits per axis");
        }
        auto& table = tables_[static_cast<std::size_t>(a)];
        table.assign(g.axis_cells(a), 0);
        for (std::uint64_t c = 0; c < g.axis_cells(a); ++c) {
            std::uint64_t v = 0;
            for (int bit = 0; bit < g.axis_bits(a); ++bit) {
                if ((c >> bit) & 1u) {
                    const int level = (g.axis_bits(a) - 1 - bit) * g.dims() + a;
                    v |= std::uint64_t{1} << (g.depth() - 1 - level);
                }
            }
            table[c] = v;
        }
    }
}

Box cell_bounds(std::uint64_t index, const GridSpec& g) {
    if (index >= g.cell_count()) throw std::out_of_range("cell index out of range");
    std::uint64_t cells[64];
    z_index_to_cells(index, g, {cells, static_cast<std::size_t>(g.dims())});
    Box box;
    for (int i = 0; i < g.dims(); ++i) {
        const double span = g.upper(i) - g.lower(i);
        const auto n = static_cast<double>(g.axis_cells(i));
        box.lo.push_back(g.lower(i) + span * (static_cast<double>(cells[i]) / n));
        box.hi.push_back(g.lower(i) + span * (static_cast<double>(cells[i] + 1) / n));
    }
    return box;
}

// ---------------------------------------------------------------------------
// OccupancyBitset
// ---------------------------------------------------------------------------

OccupancyBitset::OccupancyBitset(std::uint64_t size_bits)
    : size_bits_(size_bits), words_((size_bits + 63) / 64, 0) {}

OccupancyBitset OccupancyBitset::from_words(std::uint64_t size_bits,
                                            std::vector<std::uint64_t> words) {
    if (words.size() != (size_bits + 63) / 64) {
        throw std::invalid_argument("word count does not match bit length");
    }
    OccupancyBitset out;
    out.size_bits_ = size_bits;
    out.words_ = std::move(words);
    if (size_bits & 63) {
        out.words_.back() &= (~std::uint64_t{0}) >> (64 - (size_bits & 63));
    }
    return out;
}

void OccupancyBitset::set_range(std::uint64_t first, std::uint64_t last) {
    if (first >= last) return;
    std::uint64_t w0 = first >> 6;
    std::uint64_t w1 = (last - 1) >> 6;
    std::uint64_t mask0 = ~std::uint64_t{0} << (first & 63);
    std::uint64_t mask1 = ~std::uint64_t{0} >> (63 - ((last - 1) & 63));
    if (w0 == w1) {
        words_[w0] |= mask0 & mask1;
        return;
    }
    words_[w0] |= mask0;
    for (std::uint64_t w = w0 + 1; w < w1; ++w) words_[w] = ~std::uint64_t{0};
    words_[w1] |= mask1;
}

std::uint64_t OccupancyBitset::count() const {
    std::uint64_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
    return total;
}

void OccupancyBitset::or_with(const OccupancyBitset& other) {
    if (other.size_bits_ != size_bits_) throw std::invalid_argument("bitset size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

void OccupancyBitset::clear() { std::fill(words_.begin(), words_.end(), 0); }

void OccupancyBitset::collect(std::vector<std::uint64_t>& out) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t word = words_[w];
        while (word) {
            const int bit = std::countr_zero(word);
            out.push_back((static_cast<std::uint64_t>(w) << 6) + static_cast<std::uint64_t>(bit));
            word &= word - 1;
        }
    }
}

bool intersects(const OccupancyBitset& a, const OccupancyBitset& b) {
    if (a.size_bits() != b.size_bits()) throw std::invalid_argument("grid mismatch");
    auto wa = a.words();
    auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) {
        if (wa[i] & wb[i]) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Box rasterization
// ---------------------------------------------------------------------------

namespace {

// Recursive splat over the z-order tree with integer cell ranges: fully
// covered subtrees become contiguous index ranges, partial ones descend.
struct RasterContext {
    const GridSpec* grid;
    const std::int64_t* first;  // per-axis inclusive cell range of the box
    const std::int64_t* last;
    OccupancyBitset* bits;
    std::vector<std::uint64_t>* indices;

    void emit_range(std::uint64_t begin, std::uint64_t end) const {
        if (bits) bits->set_range(begin, end);
        if (indices) {
            for (std::uint64_t i = begin; i < end; ++i) indices->push_back(i);
        }
    }

    void descend(int level, std::uint64_t prefix, std::int64_t* node_lo,
                 std::int64_t* node_hi) const {
        const int k = grid->dims();
        for (int a = 0; a < k; ++a) {
            if (node_hi[a] < first[a] || node_lo[a] > last[a]) return;
        }
        bool covered = true;
        for (int a = 0; a < k; ++a) {
            if (node_lo[a] < first[a] || node_hi[a] > last[a]) {
                covered = false;
                break;
            }
        }
        const int remaining = grid->depth() - level;
        if (covered) {
            emit_range(prefix << remaining, (prefix + 1) << remaining);
            return;
        }
        const int axis = level % k;
        const std::int64_t lo = node_lo[axis];
        const std::int64_t hi = node_hi[axis];
        const std::int64_t mid = lo + (hi - lo) / 2;
        node_hi[axis] = mid;
        descend(level + 1, prefix << 1, node_lo, node_hi);
        node_hi[axis] = hi;
        node_lo[axis] = mid + 1;
        descend(level + 1, (prefix << 1) | 1, node_lo, node_hi);
        node_lo[axis] = lo;
    }
};

void rasterize_box_impl(const Box& b, const GridSpec& g, OccupancyBitset* bits,
                        std::vector<std::uint64_t>* indices) {
    const int k = g.dims();
    if (static_cast<int>(b.lo.size()) != k || static_cast<int>(b.hi.size()) != k) {
        throw std::invalid_argument("box dimension mismatch");
    }
    std::int64_t first[64];
    std::int64_t last[64];
    for (int a = 0; a < k; ++a) {
        auto [f, l] = g.overlap_cells(a, b.lo[static_cast<std::size_t>(a)],
                                      b.hi[static_cast<std::size_t>(a)]);
        if (f > l) return;  // no positive-measure overlap
        first[a] = f;
        last[a] = l;
    }
    std::int64_t node_lo[64];
    std::int64_t node_hi[64];
    for (int a = 0; a < k; ++a) {
        node_lo[a] = 0;
        node_hi[a] = static_cast<std::int64_t>(g.axis_cells(a)) - 1;
    }
    RasterContext ctx{&g, first, last, bits, indices};
    ctx.descend(0, 0, node_lo, node_hi);
}

}  // namespace

OccupancyBitset rasterize_box(const Box& b, const GridSpec& g) {
    OccupancyBitset bits = OccupancyBitset::for_grid(g);
    rasterize_box_impl(b, g, &bits, nullptr);
    return bits;
}

void rasterize_box_indices(const Box& b, const GridSpec& g, std::vector<std::uint64_t>& out) {
    rasterize_box_impl(b, g, nullptr, &out);
}

// ---------------------------------------------------------------------------
// Bitset file format
// ---------------------------------------------------------------------------

namespace {

constexpr char kBitsetMagic[4] = {'Z', 'O', 'B', 'V'};

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void save_bitset(const std::filesystem::path& path, const OccupancyBitset& bits,
                 const GridSpec& g) {
    if (bits.size_bits() != g.cell_count()) {
        throw std::invalid_argument("bitset does not match grid cell count");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    unsigned char header[16] = {};
    std::memcpy(header, kBitsetMagic, 4);
    header[4] = static_cast<unsigned char>(g.dims());
    header[5] = static_cast<unsigned char>(g.depth());
    os.write(reinterpret_cast<const char*>(header), 16);
    for (std::uint64_t w : bits.words()) write_u64_le(os, w);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

LoadedBitset load_bitset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    unsigned char header[16];
    is.read(reinterpret_cast<char*>(header), 16);
    if (!is || std::memcmp(header, kBitsetMagic, 4) != 0) {
        throw std::runtime_error("not a bitset file: " + path.string());
    }
    LoadedBitset out;
    out.dims = header[4];
    out.depth = header[5];
    if (out.depth < 1 || out.depth > 63) throw std::runtime_error("corrupt bitset header");
    const std::uint64_t size_bits = std::uint64_t{1} << out.depth;
    const std::uint64_t words = (size_bits + 63) / 64;
    std::vector<std::uint64_t> data(words);
    for (std::uint64_t i = 0; i < words; ++i) data[i] = read_u64_le(is);
    if (!is) throw std::runtime_error("truncated bitset file: " + path.string());
    out.bits = OccupancyBitset::from_words(size_bits, std::move(data));
    return out;
}

}  // namespace ltlgrid
