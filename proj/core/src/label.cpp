#include "ltlgrid/label.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ltlgrid {

// ---------------------------------------------------------------------------
// CsrBoolMatrix
// ---------------------------------------------------------------------------

void CsrBoolMatrix::validate() const {
    if (row_offsets.size() != rows + 1) {
        throw std::invalid_argument("row_offsets must have rows+1 entries");
    }
    if (!row_offsets.empty() && row_offsets.front() != 0) {
        throw std::invalid_argument("row_offsets must start at 0");
    }
    for (std::size_t i = 0; i + 1 < row_offsets.size(); ++i) {
        if (row_offsets[i] > row_offsets[i + 1]) {
            throw std::invalid_argument("row_offsets must be nondecreasing");
        }
    }
    if (!row_offsets.empty() && row_offsets.back() != col_indices.size()) {
        throw std::invalid_argument("row_offsets must end at nnz");
    }
    for (std::uint64_t i = 0; i < rows; ++i) {
        auto r = row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (r[k] >= cols) throw std::invalid_argument("column index out of range");
            if (k && r[k - 1] >= r[k]) {
                throw std::invalid_argument("column indices must be strictly ascending per row");
            }
        }
    }
}

CsrBoolMatrix to_csr(std::span<const OccupancyBitset> rows) {
    CsrBoolMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows.front().size_bits();
    m.row_offsets.reserve(rows.size() + 1);
    m.row_offsets.push_back(0);
    std::vector<std::uint64_t> cells;
    for (const auto& r : rows) {
        if (r.size_bits() != m.cols) throw std::invalid_argument("row length mismatch");
        cells.clear();
        r.collect(cells);
        for (std::uint64_t c : cells) m.col_indices.push_back(static_cast<std::uint32_t>(c));
        m.row_offsets.push_back(m.col_indices.size());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Swept-volume matrix
// ---------------------------------------------------------------------------

namespace {

int effective_workers(int workers, std::uint64_t items) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int n = workers > 0 ? workers : hw;
    if (static_cast<std::uint64_t>(n) > items) n = static_cast<int>(items);
    return std::max(n, 1);
}

}  // namespace

CsrBoolMatrix swept_volume_matrix(const TransitionSystem& s, const FootprintSpec& f,
                                  const GridSpec& g, int workers) {
    if (g.depth() > 32) {
        throw std::invalid_argument("swept_volume_matrix supports depth <= 32");
    }
    const std::uint64_t m = s.num_edges();
    std::vector<std::vector<std::uint64_t>> per_edge(m);
    const int n_workers = effective_workers(workers, m);

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = static_cast<std::uint64_t>(w); i < m;
                     i += static_cast<std::uint64_t>(n_workers)) {
                    sweep_voxelize_indices(s.trajectories[i], f, g, per_edge[i]);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    CsrBoolMatrix csr;
    csr.rows = m;
    csr.cols = g.cell_count();
    csr.row_offsets.reserve(m + 1);
    csr.row_offsets.push_back(0);
    std::uint64_t nnz = 0;
    for (const auto& row : per_edge) nnz += row.size();
    csr.col_indices.reserve(nnz);
    for (const auto& row : per_edge) {
        for (std::uint64_t c : row) csr.col_indices.push_back(static_cast<std::uint32_t>(c));
        csr.row_offsets.push_back(csr.col_indices.size());
    }
    return csr;
}

// ---------------------------------------------------------------------------
// DensePropMatrix / LabelMatrix
// ---------------------------------------------------------------------------

DensePropMatrix::DensePropMatrix(std::uint64_t cells, std::vector<OccupancyBitset> columns)
    : cells_(cells), columns_(std::move(columns)) {
    if (columns_.size() > 64) throw std::invalid_argument("at most 64 propositions");
    for (const auto& c : columns_) {
        if (c.size_bits() != cells_) throw std::invalid_argument("column length mismatch");
    }
}

LabelMatrix::LabelMatrix(std::uint64_t rows, int props)
    : rows_(rows), props_(props), words_per_row_((props + 63) / 64) {
    if (props < 0 || props > 64) throw std::invalid_argument("props must be in [0, 64]");
    bits_.assign(rows_ * static_cast<std::uint64_t>(words_per_row_), 0);
}

// ---------------------------------------------------------------------------
// Boolean matrix product
// ---------------------------------------------------------------------------

std::pair<bool, std::uint64_t> label_edge_counting(std::span<const std::uint32_t> row,
                                                   const OccupancyBitset& prop_column) {
    std::uint64_t examined = 0;
    for (std::uint32_t c : row) {
        ++examined;
        if (prop_column.test(c)) return {true, examined};
    }
    return {false, row.size()};
}

LabelMatrix label_all(const CsrBoolMatrix& m, const DensePropMatrix& p, int workers) {
    if (m.cols != p.cells()) {
        throw std::invalid_argument("dimension mismatch: matrix cols " + std::to_string(m.cols) +
                                    " vs proposition rows " + std::to_string(p.cells()));
    }
    LabelMatrix out(m.rows, p.num_props());
    const int n_workers = effective_workers(workers, m.rows);
    const int props = p.num_props();

    auto scan_rows = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto row = m.row(i);
            for (int j = 0; j < props; ++j) {
                const OccupancyBitset& column = p.column(j);
                for (std::uint32_t c : row) {
                    if (column.test(c)) {
                        out.set(i, j);
                        break;  // first witness ends this entry's scan
                    }
                }
            }
        }
    };

    if (n_workers == 1) {
        scan_rows(0, m.rows);
        return out;
    }
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (m.rows + static_cast<std::uint64_t>(n_workers) - 1) /
                                static_cast<std::uint64_t>(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        const std::uint64_t begin = static_cast<std::uint64_t>(w) * chunk;
        const std::uint64_t end = std::min(m.rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(scan_rows, begin, end);
    }
    for (auto& t : pool) t.join();
    return out;
}

EdgeLabeling apply_labels(const TransitionSystem& s, const LabelMatrix& l,
                          const Alphabet& alphabet) {
    if (l.rows() != s.num_edges()) {
        throw std::invalid_argument("label matrix rows " + std::to_string(l.rows()) +
                                    " vs edges " + std::to_string(s.num_edges()));
    }
    if (l.props() != alphabet.size()) {
        throw std::invalid_argument("label matrix props " + std::to_string(l.props()) +
                                    " vs alphabet size " + std::to_string(alphabet.size()));
    }
    EdgeLabeling out;
    out.alphabet_size = alphabet.size();
    out.labels.resize(s.num_edges());
    for (std::uint64_t i = 0; i < l.rows(); ++i) {
        for (int j = 0; j < l.props(); ++j) {
            if (l.get(i, j)) out.labels[i].set(j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

namespace {

constexpr char kCsrMagic[4] = {'C', 'S', 'B', '1'};
constexpr char kLabelMagic[4] = {'L', 'B', 'M', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void CsrBoolMatrix::save(const std::filesystem::path& path) const {
    const bool wide = cols > 0xffffffffull || nnz() > 0xffffffffull;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(kCsrMagic, 4);
    put_u32(os, wide ? 1u : 0u);
    put_u64(os, rows);
    put_u64(os, cols);
    put_u64(os, nnz());
    for (std::uint64_t v : row_offsets) {
        if (wide) put_u64(os, v);
        else put_u32(os, static_cast<std::uint32_t>(v));
    }
    for (std::uint32_t v : col_indices) {
        if (wide) put_u64(os, v);
        else put_u32(os, v);
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

CsrBoolMatrix CsrBoolMatrix::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCsrMagic, 4) != 0) {
        throw std::runtime_error("not a CSR file: " + path.string());
    }
    const std::uint32_t flags = get_u32(is);
    const bool wide = flags & 1u;
    CsrBoolMatrix m;
    m.rows = get_u64(is);
    m.cols = get_u64(is);
    const std::uint64_t nnz = get_u64(is);
    if (m.cols > 0xffffffffull) {
        throw std::runtime_error("CSR column space too large for this build");
    }
    m.row_offsets.resize(m.rows + 1);
    for (auto& v : m.row_offsets) v = wide ? get_u64(is) : get_u32(is);
    m.col_indices.resize(nnz);
    for (auto& v : m.col_indices) {
        const std::uint64_t c = wide ? get_u64(is) : get_u32(is);
        v = static_cast<std::uint32_t>(c);
    }
    if (!is) throw std::runtime_error("truncated CSR file: " + path.string());
    m.validate();
    return m;
}

void LabelMatrix::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(kLabelMagic, 4);
    put_u32(os, 1);  // version
    put_u64(os, rows_);
    put_u32(os, static_cast<std::uint32_t>(props_));
    for (std::uint64_t w : bits_) put_u64(os, w);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

LabelMatrix LabelMatrix::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kLabelMagic, 4) != 0) {
        throw std::runtime_error("not a label matrix file: " + path.string());
    }
    if (get_u32(is) != 1) throw std::runtime_error("unsupported label matrix version");
    const std::uint64_t rows = get_u64(is);
    const auto props = static_cast<int>(get_u32(is));
    LabelMatrix l(rows, props);
    for (auto& w : l.bits_) w = get_u64(is);
    if (!is) throw std::runtime_error("truncated label matrix file: " + path.string());
    return l;
}

std::string LabelMatrix::to_csv(const Alphabet& alphabet) const {
    if (alphabet.size() != props_) throw std::invalid_argument("alphabet size mismatch");
    std::ostringstream os;
    os << "edge,propositions\n";
    for (std::uint64_t i = 0; i < rows_; ++i) {
        os << i << ",";
        bool first = true;
        for (int j = 0; j < props_; ++j) {
            if (!get(i, j)) continue;
            if (!first) os << ' ';
            os << alphabet.prop(j).name;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace ltlgrid
