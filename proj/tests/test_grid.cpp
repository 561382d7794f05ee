#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "ltlgrid/grid.hpp"
#include "ltlgrid/rng.hpp"
#include "support/oracles.hpp"

using namespace ltlgrid;

namespace {

GridSpec unit_square(int depth) { return GridSpec({{0.0, 1.0}, {0.0, 1.0}}, depth); }

std::vector<double> random_point(SplitMix64& rng, const GridSpec& g) {
    std::vector<double> p;
    for (int i = 0; i < g.dims(); ++i) p.push_back(rng.uniform(g.lower(i), g.upper(i)));
    return p;
}

}  // namespace

TEST_CASE("z_index: quantization examples on the unit square") {
    auto g2 = unit_square(2);
    CHECK(z_index(std::vector<double>{0.1, 0.1}, g2) == 0);
    CHECK(z_index(std::vector<double>{0.9, 0.9}, g2) == 3);

    auto g4 = unit_square(4);
    // axis-0 bits 10, axis-1 bits 00, interleaved 1000b = 8
    CHECK(z_index(std::vector<double>{0.6, 0.2}, g4) == 8);
}

TEST_CASE("z_index: midpoint boundary goes to the upper cell") {
    GridSpec g({{0.0, 1.0}}, 1);
    CHECK(z_index(std::vector<double>{0.5}, g) == 1);
    CHECK(z_index_tree_descent(std::vector<double>{0.5}, g) == 1);
}

TEST_CASE("z_index: out-of-bounds points throw") {
    auto g = unit_square(4);
    CHECK_THROWS_AS(z_index(std::vector<double>{1.0, 0.5}, g), std::out_of_range);
    CHECK_THROWS_AS(z_index(std::vector<double>{-0.1, 0.5}, g), std::out_of_range);
    CHECK_THROWS_AS(z_index_tree_descent(std::vector<double>{0.5, 1.5}, g), std::out_of_range);
}

TEST_CASE("z_index agrees with the tree-descent oracle") {
    SplitMix64 rng(42);
    for (int k : {2, 3}) {
        for (int d : {8, 12, 21}) {
            std::vector<std::pair<double, double>> bounds;
            for (int i = 0; i < k; ++i) bounds.push_back({-3.0 + i, 7.0 + 2 * i});
            GridSpec g(bounds, d);
            for (int trial = 0; trial < 10000; ++trial) {
                auto p = random_point(rng, g);
                REQUIRE(z_index(p, g) == z_index_tree_descent(p, g));
            }
        }
    }
}

TEST_CASE("z_index: locality") {
    auto g = unit_square(8);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        auto p = random_point(rng, g);
        auto q = p;
        // Same cell -> same index.
        const auto idx = z_index(p, g);
        Box cell = cell_bounds(idx, g);
        std::vector<double> center;
        for (int i = 0; i < g.dims(); ++i) center.push_back((cell.lo[i] + cell.hi[i]) / 2);
        CHECK(z_index(center, g) == idx);

        // Interleaved prefixes agree above the first differing split.
        q[0] = rng.uniform(0.0, 1.0);
        q[1] = rng.uniform(0.0, 1.0);
        const auto other = z_index(q, g);
        if (other == idx) continue;
        const auto cp = oracles::decode_cells(idx, g);
        const auto cq = oracles::decode_cells(other, g);
        int first_diff_level = g.depth();
        for (int level = 0; level < g.depth(); ++level) {
            const int axis = level % g.dims();
            const int bit_pos = g.axis_bits(axis) - 1 - level / g.dims();
            if (((cp[static_cast<std::size_t>(axis)] >> bit_pos) & 1u) !=
                ((cq[static_cast<std::size_t>(axis)] >> bit_pos) & 1u)) {
                first_diff_level = level;
                break;
            }
        }
        REQUIRE(first_diff_level < g.depth());
        CHECK((idx >> (g.depth() - first_diff_level)) == (other >> (g.depth() - first_diff_level)));
    }
}

TEST_CASE("cell_bounds: corner cell, centre round trip, tiling") {
    auto g = unit_square(4);
    Box corner = cell_bounds(0, g);
    CHECK(corner.lo[0] == doctest::Approx(0.0));
    CHECK(corner.lo[1] == doctest::Approx(0.0));
    CHECK(corner.hi[0] == doctest::Approx(0.25));
    CHECK(corner.hi[1] == doctest::Approx(0.25));

    // Exhaustive centre round trip at d <= 12.
    for (const GridSpec& gg :
         {GridSpec({{-2.0, 5.0}, {1.0, 9.0}}, 10), GridSpec({{0.0, 1.0}, {0.0, 2.0}, {0.0, 4.0}}, 12)}) {
        double volume = 0;
        for (std::uint64_t i = 0; i < gg.cell_count(); ++i) {
            Box b = cell_bounds(i, gg);
            std::vector<double> center;
            double v = 1;
            for (int axis = 0; axis < gg.dims(); ++axis) {
                center.push_back((b.lo[static_cast<std::size_t>(axis)] +
                                  b.hi[static_cast<std::size_t>(axis)]) / 2);
                v *= b.hi[static_cast<std::size_t>(axis)] - b.lo[static_cast<std::size_t>(axis)];
            }
            REQUIRE(z_index(center, gg) == i);
            volume += v;
        }
        double total = 1;
        for (int axis = 0; axis < gg.dims(); ++axis) total *= gg.upper(axis) - gg.lower(axis);
        CHECK(volume == doctest::Approx(total).epsilon(1e-9));
    }
}

TEST_CASE("rasterize_box: whole workspace and single-cell boxes") {
    auto g = unit_square(6);
    Box whole{{0.0, 0.0}, {1.0, 1.0}};
    auto bits = rasterize_box(whole, g);
    CHECK(bits.count() == g.cell_count());
    CHECK(bits.occupancy() == doctest::Approx(1.0));

    Box inner{{0.01, 0.01}, {0.05, 0.05}};  // strictly inside cell (0,0)
    auto one = rasterize_box(inner, g);
    CHECK(one.count() == 1);
    CHECK(one.test(z_index(std::vector<double>{0.02, 0.02}, g)));
}

TEST_CASE("rasterize_box: midplane-spanning box matches the per-cell oracle") {
    auto g = unit_square(2);
    Box span{{0.4, 0.1}, {0.6, 0.2}};
    auto bits = rasterize_box(span, g);
    auto naive = oracles::rasterize_box_naive(span, g);
    for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
        CAPTURE(i);
        REQUIRE(bits.test(i) == static_cast<bool>(naive[i]));
    }
}

TEST_CASE("rasterize_box: random boxes match the per-cell oracle") {
    SplitMix64 rng(777);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = trial % 2 ? 2 : 3;
        std::vector<std::pair<double, double>> bounds;
        for (int i = 0; i < k; ++i) bounds.push_back({-1.0, 3.0});
        GridSpec g(bounds, k == 2 ? 8 : 9);
        Box b;
        for (int i = 0; i < k; ++i) {
            double a = rng.uniform(-1.5, 3.5);
            double c = rng.uniform(-1.5, 3.5);
            b.lo.push_back(std::min(a, c));
            b.hi.push_back(std::max(a, c));
        }
        auto bits = rasterize_box(b, g);
        auto naive = oracles::rasterize_box_naive(b, g);
        for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
            REQUIRE(bits.test(i) == static_cast<bool>(naive[i]));
        }
    }
}

TEST_CASE("rasterize_box: a box split at any plane rasterizes to the union") {
    SplitMix64 rng(31);
    auto g = unit_square(6);
    for (int trial = 0; trial < 50; ++trial) {
        Box whole{{rng.uniform(0, 0.4), rng.uniform(0, 0.4)},
                  {rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)}};
        const double split = rng.uniform(whole.lo[0], whole.hi[0]);
        Box left = whole, right = whole;
        left.hi[0] = split;
        right.lo[0] = split;
        auto a = rasterize_box(left, g);
        a.or_with(rasterize_box(right, g));
        CHECK(a == rasterize_box(whole, g));
    }
}

TEST_CASE("intersects: examples and properties") {
    auto g = unit_square(6);
    auto a = rasterize_box(Box{{0.1, 0.1}, {0.5, 0.5}}, g);
    auto b = rasterize_box(Box{{0.6, 0.6}, {0.9, 0.9}}, g);
    CHECK(intersects(a, a));
    CHECK_FALSE(intersects(a, b));

    SplitMix64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        OccupancyBitset x(512), y(512);
        for (int i = 0; i < 30; ++i) {
            x.set(rng.below(512));
            y.set(rng.below(512));
        }
        bool naive = false;
        for (std::uint64_t i = 0; i < 512; ++i) naive = naive || (x.test(i) && y.test(i));
        CHECK(intersects(x, y) == naive);
        CHECK(intersects(x, y) == intersects(y, x));
        // monotone under insertion
        auto x2 = x;
        x2.set(rng.below(512));
        if (intersects(x, y)) CHECK(intersects(x2, y));
    }
    OccupancyBitset wrong(256);
    CHECK_THROWS_AS(intersects(wrong, a), std::invalid_argument);
}

TEST_CASE("occupancy bitset: set_range and collect") {
    OccupancyBitset bits(300);
    bits.set_range(5, 200);
    CHECK(bits.count() == 195);
    CHECK_FALSE(bits.test(4));
    CHECK(bits.test(5));
    CHECK(bits.test(199));
    CHECK_FALSE(bits.test(200));
    std::vector<std::uint64_t> idx;
    bits.collect(idx);
    REQUIRE(idx.size() == 195);
    CHECK(idx.front() == 5);
    CHECK(idx.back() == 199);
}

TEST_CASE("bitset file round trip") {
    auto g = unit_square(8);
    SplitMix64 rng(10);
    auto bits = OccupancyBitset::for_grid(g);
    for (int i = 0; i < 100; ++i) bits.set(rng.below(g.cell_count()));
    const auto path = std::filesystem::temp_directory_path() / "ltlgrid_test_bits.bin";
    save_bitset(path, bits, g);
    auto loaded = load_bitset(path);
    CHECK(loaded.dims == 2);
    CHECK(loaded.depth == 8);
    CHECK(loaded.bits == bits);
    std::filesystem::remove(path);
    CHECK_THROWS(load_bitset(path));
}

TEST_CASE("grid spec json round trip and validation") {
    GridSpec g({{0.0, 72.0}, {0.0, 72.0}, {0.0, 7.2}}, 21);
    auto g2 = GridSpec::from_json(g.to_json());
    CHECK(g2 == g);
    CHECK(g.axis_bits(0) == 7);
    CHECK(g.axis_bits(1) == 7);
    CHECK(g.axis_bits(2) == 7);
    // uneven split gives earlier axes the extra bits
    GridSpec uneven({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, 11);
    CHECK(uneven.axis_bits(0) == 4);
    CHECK(uneven.axis_bits(1) == 4);
    CHECK(uneven.axis_bits(2) == 3);
    CHECK_THROWS_AS(GridSpec({{1.0, 0.0}}, 4), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({{0.0, 1.0}}, 64), std::invalid_argument);
}
