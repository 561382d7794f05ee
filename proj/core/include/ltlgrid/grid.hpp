#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ltlgrid/alphabet.hpp"

namespace ltlgrid {

/// Axis-aligned box in workspace coordinates.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Rectangular k-dimensional workspace split into 2^depth cells along a
/// z-order curve. Axis i receives depth/k bits, the first depth%k axes one
/// extra, matching round-robin interleaving that starts at axis 0.
class GridSpec {
public:
    GridSpec(std::vector<std::pair<double, double>> bounds, int depth);

    int dims() const { return static_cast<int>(lo_.size()); }
    int depth() const { return depth_; }
    std::uint64_t cell_count() const { return std::uint64_t{1} << depth_; }
    int axis_bits(int axis) const { return bits_[static_cast<std::size_t>(axis)]; }
    std::uint64_t axis_cells(int axis) const {
        return std::uint64_t{1} << bits_[static_cast<std::size_t>(axis)];
    }
    double lower(int axis) const { return lo_[static_cast<std::size_t>(axis)]; }
    double upper(int axis) const { return hi_[static_cast<std::size_t>(axis)]; }
    double cell_width(int axis) const {
        return (upper(axis) - lower(axis)) / static_cast<double>(axis_cells(axis));
    }

    /// Cell coordinate of x on one axis; throws if x lies outside [lo, hi).
    std::uint64_t quantize(int axis, double x) const;

    /// Cell range [first, last] of the positive-measure overlap between
    /// [x_lo, x_hi] and the axis; empty when first > last.
    std::pair<std::int64_t, std::int64_t> overlap_cells(int axis, double x_lo,
                                                        double x_hi) const;

    std::string to_json() const;
    static GridSpec from_json(const std::string& text);

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    int depth_ = 0;
    std::vector<int> bits_;
};

/// Z-order (Morton) index of a point: per-axis quantized coordinates with
/// their bits interleaved round-robin, most significant index bit first.
std::uint64_t z_index(std::span<const double> p, const GridSpec& g);

/// Reference oracle computing the same index by descending the space
/// partitioning binary tree one pivot comparison per level. Coordinates
/// equal to a pivot resolve to the upper half.
std::uint64_t z_index_tree_descent(std::span<const double> p, const GridSpec& g);

/// Interleaves per-axis cell coordinates into a z-order index.
std::uint64_t z_index_of_cells(std::span<const std::uint64_t> cells, const GridSpec& g);

/// Per-axis cell coordinates of a z-order index.
void z_index_to_cells(std::uint64_t index, const GridSpec& g, std::span<std::uint64_t> cells);

/// Closed box of one cell; the boxes of all indices tile the workspace.
Box cell_bounds(std::uint64_t index, const GridSpec& g);

/// Per-axis scatter tables: the z-order index of a cell is the OR of each
/// axis coordinate's scattered bits. Cheap bulk alternative to
/// z_index_of_cells; usable when every axis has at most 24 bits.
class ZScatter {
public:
    explicit ZScatter(const GridSpec& g);

    std::uint64_t scatter(int axis, std::uint64_t cell) const {
        return tables_[static_cast<std::size_t>(axis)][cell];
    }

private:
    std::vector<std::vector<std::uint64_t>> tables_;
};

/// Fixed-length bit vector over the 2^depth grid cells.
class OccupancyBitset {
public:
    OccupancyBitset() = default;
    explicit OccupancyBitset(std::uint64_t size_bits);
    static OccupancyBitset for_grid(const GridSpec& g) { return OccupancyBitset(g.cell_count()); }
    static OccupancyBitset from_words(std::uint64_t size_bits, std::vector<std::uint64_t> words);

    std::uint64_t size_bits() const { return size_bits_; }
    bool test(std::uint64_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    /// Sets every bit in [first, last).
    void set_range(std::uint64_t first, std::uint64_t last);

    std::uint64_t count() const;
    double occupancy() const {
        return size_bits_ ? static_cast<double>(count()) / static_cast<double>(size_bits_) : 0.0;
    }
    void or_with(const OccupancyBitset& other);
    void clear();

    /// Indices of set bits in ascending order, appended to out.
    void collect(std::vector<std::uint64_t>& out) const;

    std::span<const std::uint64_t> words() const { return words_; }

    friend bool operator==(const OccupancyBitset&, const OccupancyBitset&) = default;

private:
    std::uint64_t size_bits_ = 0;
    std::vector<std::uint64_t> words_;
};

/// True iff some cell is set in both; word-wise with early exit.
bool intersects(const OccupancyBitset& a, const OccupancyBitset& b);

/// Bits of every cell whose closed box overlaps b with positive measure
/// (shared faces do not count).
OccupancyBitset rasterize_box(const Box& b, const GridSpec& g);

/// Same cell set as rasterize_box, appended to `out` as z-order indices.
void rasterize_box_indices(const Box& b, const GridSpec& g, std::vector<std::uint64_t>& out);

/// Binary bitset file: 16-byte header (magic "ZOBV", k, depth, reserved)
/// followed by little-endian packed 64-bit words.
void save_bitset(const std::filesystem::path& path, const OccupancyBitset& bits,
                 const GridSpec& g);
struct LoadedBitset {
    int dims = 0;
    int depth = 0;
    OccupancyBitset bits;
};
LoadedBitset load_bitset(const std::filesystem::path& path);

}  // namespace ltlgrid
