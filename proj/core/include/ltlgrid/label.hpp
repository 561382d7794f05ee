#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ltlgrid/abstraction.hpp"
#include "ltlgrid/alphabet.hpp"
#include "ltlgrid/grid.hpp"

namespace ltlgrid {

/// Compressed sparse row boolean matrix: row i's set columns are
/// col_indices[row_offsets[i] .. row_offsets[i+1]), stored ascending.
struct CsrBoolMatrix {
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<std::uint64_t> row_offsets;  // rows+1, first 0, last nnz
    std::vector<std::uint32_t> col_indices;

    std::uint64_t nnz() const { return col_indices.size(); }
    std::span<const std::uint32_t> row(std::uint64_t i) const {
        return {col_indices.data() + row_offsets[i], col_indices.data() + row_offsets[i + 1]};
    }
    void validate() const;

    /// Binary file: header (magic "CSB1", width flag, rows, cols, nnz) then
    /// offsets and indices, little-endian 32-bit with a 64-bit variant
    /// flagged in the header.
    void save(const std::filesystem::path& path) const;
    static CsrBoolMatrix load(const std::filesystem::path& path);
};

/// Lossless CSR encoding of a stack of equal-length bitset rows.
CsrBoolMatrix to_csr(std::span<const OccupancyBitset> rows);

/// One swept-volume row per transition, built in parallel over edges
/// without materialising per-edge bitsets. workers == 0 uses all cores.
CsrBoolMatrix swept_volume_matrix(const TransitionSystem& s, const FootprintSpec& f,
                                  const GridSpec& g, int workers = 0);

/// Dense proposition matrix, stored column-major: one occupancy bitset per
/// proposition so a row scan streams a single column.
class DensePropMatrix {
public:
    DensePropMatrix(std::uint64_t cells, std::vector<OccupancyBitset> columns);

    std::uint64_t cells() const { return cells_; }
    int num_props() const { return static_cast<int>(columns_.size()); }
    const OccupancyBitset& column(int j) const { return columns_[static_cast<std::size_t>(j)]; }

private:
    std::uint64_t cells_ = 0;
    std::vector<OccupancyBitset> columns_;
};

/// Edge-by-proposition bit matrix.
class LabelMatrix {
public:
    LabelMatrix() = default;
    LabelMatrix(std::uint64_t rows, int props);

    std::uint64_t rows() const { return rows_; }
    int props() const { return props_; }
    bool get(std::uint64_t i, int j) const {
        const std::uint64_t bit = i * static_cast<std::uint64_t>(words_per_row_) * 64 +
                                  static_cast<std::uint64_t>(j);
        return (bits_[bit >> 6] >> (bit & 63)) & 1u;
    }
    void set(std::uint64_t i, int j) {
        const std::uint64_t bit = i * static_cast<std::uint64_t>(words_per_row_) * 64 +
                                  static_cast<std::uint64_t>(j);
        bits_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
    }

    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

    void save(const std::filesystem::path& path) const;
    static LabelMatrix load(const std::filesystem::path& path);

    /// CSV rows `edge id, space-separated proposition names`.
    std::string to_csv(const Alphabet& alphabet) const;

private:
    std::uint64_t rows_ = 0;
    int props_ = 0;
    int words_per_row_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Boolean sparse-by-dense product: L(i, j) = OR_k M(i, k) AND P(k, j).
/// Rows are partitioned across workers; each row's stored indices are
/// scanned linearly and the scan for an (i, j) entry stops at the first
/// witness. Output is identical for any worker count.
LabelMatrix label_all(const CsrBoolMatrix& m, const DensePropMatrix& p, int workers = 0);

/// Single row-column query returning the label bit and the number of stored
/// indices examined (position of the first witness + 1, or the row's nnz
/// when there is none).
std::pair<bool, std::uint64_t> label_edge_counting(std::span<const std::uint32_t> row,
                                                   const OccupancyBitset& prop_column);

/// Per-edge label sets, the transition labeling function of a system.
struct EdgeLabeling {
    int alphabet_size = 0;
    std::vector<AlphabetSymbol> labels;  // one per edge
};

/// Converts a label matrix into per-edge proposition sets for `s`.
EdgeLabeling apply_labels(const TransitionSystem& s, const LabelMatrix& l,
                          const Alphabet& alphabet);

}  // namespace ltlgrid
