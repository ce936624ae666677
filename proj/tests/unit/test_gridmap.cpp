#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "travmap/gridmap.hpp"
#include "travmap/random.hpp"

using namespace travmap;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> pixels)
{
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

TraversabilityMap random_map(Rng& rng, int w, int h)
{
    TraversabilityMap m(MapGeometry { {}, 0.1, w, h });
    for (auto& c : m.cells())
        c = static_cast<CellState>(rng.below(3));
    return m;
}

} // namespace

TEST_CASE("new map geometry")
{
    const auto m = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    CHECK(m.width() == 30);
    CHECK(m.height() == 60);
    CHECK(m.count(CellState::Unknown) == 1800);

    const auto one = TraversabilityMap::create(0, 0, 0.1, 0.1, 0.1);
    CHECK(one.width() == 1);
    CHECK(one.height() == 1);
    CHECK(one.at({ 0, 0 }) == CellState::Unknown);

    const auto partial = TraversabilityMap::create(0, 0, 0.25, 0.1, 0.1);
    CHECK(partial.width() == 3);

    CHECK_THROWS_AS(TraversabilityMap::create(0, 0, -1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(TraversabilityMap::create(0, 0, 1, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TraversabilityMap::create(0, 0, 1, 0, 0.1), std::invalid_argument);
}

TEST_CASE("world to cell")
{
    const auto m = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    CHECK(m.world_to_cell({ 0.25, 0.31 }) == CellIndex { 2, 3 });
    CHECK(m.world_to_cell({ 0.0, 0.0 }) == CellIndex { 0, 0 });
    CHECK_THROWS_AS(m.world_to_cell({ -0.01, 0.5 }), OutOfBounds);
    CHECK_THROWS_AS(m.world_to_cell({ 3.0, 0.5 }), OutOfBounds);
    CHECK_FALSE(m.try_world_to_cell({ 0.5, 6.2 }).has_value());

    for (int j = 0; j < m.height(); ++j)
        for (int i = 0; i < m.width(); ++i)
            CHECK(m.world_to_cell(m.cell_to_world({ i, j })) == CellIndex { i, j });

    const auto shifted = TraversabilityMap::create(-1.5, 2.0, 1.5, 4.0, 0.25);
    for (int j = 0; j < shifted.height(); ++j)
        for (int i = 0; i < shifted.width(); ++i)
            CHECK(shifted.world_to_cell(shifted.cell_to_world({ i, j })) == CellIndex { i, j });
}

TEST_CASE("update cell")
{
    auto m = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    m.set({ 2, 3 }, CellState::Traversable);
    CHECK(m.at({ 2, 3 }) == CellState::Traversable);
    CHECK(m.count(CellState::Unknown) == 1799);

    m.set({ 4, 4 }, CellState::Untraversable);
    m.set({ 4, 4 }, CellState::Traversable);
    CHECK(m.at({ 4, 4 }) == CellState::Traversable);

    CHECK_THROWS_AS(m.set({ 99, 99 }, CellState::Traversable), OutOfBounds);
    CHECK_THROWS_AS(m.at({ -1, 0 }), OutOfBounds);
}

TEST_CASE("mark band")
{
    auto m = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    m.mark_band({ 0, 0 }, { 1, 0 }, 0.05, CellState::Traversable);
    CHECK(m.count(CellState::Traversable) == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(m.at({ i, 0 }) == CellState::Traversable);

    auto dot = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    dot.mark_band({ 0.05, 0.05 }, { 0.05, 0.05 }, 0.0, CellState::Untraversable);
    CHECK(dot.count(CellState::Untraversable) == 1);
    CHECK(dot.at({ 0, 0 }) == CellState::Untraversable);

    auto outside = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    outside.mark_band({ 10, 10 }, { 12, 11 }, 0.5, CellState::Traversable);
    CHECK(outside.count(CellState::Unknown) == 1800);

    auto clipped = TraversabilityMap::create(0, 0, 1, 1, 0.1);
    clipped.mark_band({ -5, 0.55 }, { 5, 0.55 }, 0.0, CellState::Traversable);
    CHECK(clipped.count(CellState::Traversable) == 10);

    CHECK_THROWS_AS(m.mark_band({ 0, 0 }, { 1, 0 }, -0.1, CellState::Traversable),
                    std::invalid_argument);
}

TEST_CASE("mark band never reaches past one cell diagonal")
{
    Rng rng(3);
    const double slack = 0.1 * std::numbers::sqrt2 / 2.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto m = TraversabilityMap::create(0, 0, 3, 3, 0.1);
        const Vec2 a { 3.0 * rng.uniform(), 3.0 * rng.uniform() };
        const Vec2 b { 3.0 * rng.uniform(), 3.0 * rng.uniform() };
        const double hw = 0.4 * rng.uniform();
        m.mark_band(a, b, hw, CellState::Traversable);
        for (int j = 0; j < m.height(); ++j)
            for (int i = 0; i < m.width(); ++i) {
                const double d = point_segment_distance(m.cell_to_world({ i, j }), a, b);
                const bool marked = m.at({ i, j }) == CellState::Traversable;
                if (d > hw + slack)
                    CHECK_FALSE(marked);
                if (d < hw - 1e-9)
                    CHECK(marked);
            }
    }
}

TEST_CASE("fuse by priority")
{
    const auto base = TraversabilityMap::create(0, 0, 0.2, 0.1, 0.1);
    auto sfm = base, pfh = base, ho3 = base;
    sfm.set({ 0, 0 }, CellState::Untraversable);
    pfh.set({ 0, 0 }, CellState::Traversable);
    ho3.set({ 0, 0 }, CellState::Untraversable);

    const LayeredMap layers[] = { { &sfm, Layer::SfM }, { &pfh, Layer::PfH }, { &ho3, Layer::HO3 } };
    const auto fused = fuse(layers, LayerPriority::parse("sfm<ho3<pfh"));
    CHECK(fused.at({ 0, 0 }) == CellState::Traversable);
    CHECK(fused.at({ 1, 0 }) == CellState::Unknown);

    const auto sfm_wins = fuse(layers, LayerPriority::parse("pfh,ho3,sfm"));
    CHECK(sfm_wins.at({ 0, 0 }) == CellState::Untraversable);

    /* Highest layer unknown: next known layer decides */
    pfh.set({ 0, 0 }, CellState::Unknown);
    CHECK(fuse(layers, LayerPriority()).at({ 0, 0 }) == CellState::Untraversable);
}

TEST_CASE("fuse is idempotent and order independent")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_map(rng, 7, 5);
        const auto b = random_map(rng, 7, 5);
        const auto c = random_map(rng, 7, 5);
        const LayerPriority prio = LayerPriority::parse("ho3<sfm<pfh");

        const LayeredMap single[] = { { &a, Layer::SfM } };
        CHECK(fuse(single, prio) == a);
        const LayeredMap twice[] = { { &a, Layer::SfM }, { &a, Layer::SfM } };
        CHECK(fuse(twice, prio) == a);

        std::vector<LayeredMap> layers { { &a, Layer::SfM }, { &b, Layer::PfH }, { &c, Layer::HO3 } };
        const auto ref = fuse(layers, prio);
        std::sort(layers.begin(), layers.end(),
                  [](const LayeredMap& x, const LayeredMap& y) { return x.layer < y.layer; });
        do {
            CHECK(fuse(layers, prio) == ref);
        } while (std::next_permutation(layers.begin(), layers.end(),
                                       [](const LayeredMap& x, const LayeredMap& y) {
                                           return x.layer < y.layer;
                                       }));
    }
}

TEST_CASE("fuse rejects mismatched geometry")
{
    const auto a = TraversabilityMap::create(0, 0, 1, 1, 0.1);
    const auto b = TraversabilityMap::create(0, 0, 2, 1, 0.1);
    const LayeredMap layers[] = { { &a, Layer::SfM }, { &b, Layer::PfH } };
    CHECK_THROWS_AS(fuse(layers, LayerPriority()), std::invalid_argument);
}

TEST_CASE("layer priority parsing")
{
    const auto p = LayerPriority::parse("HO3 < PfH < SfM");
    CHECK(p.rank(Layer::SfM) > p.rank(Layer::PfH));
    CHECK(p.rank(Layer::PfH) > p.rank(Layer::HO3));
    CHECK(LayerPriority().to_string() == "SfM,HO3,PfH");
    CHECK_THROWS_AS(LayerPriority::parse("sfm,sfm"), std::invalid_argument);
    CHECK_THROWS_AS(LayerPriority::parse("sfm,lidar"), std::invalid_argument);
    CHECK_THROWS(LayerPriority::parse("sfm,pfh").rank(Layer::HO3));
}

TEST_CASE("pgm export is bit exact")
{
    auto m = TraversabilityMap::create(0, 0, 0.2, 0.2, 0.1);
    m.set({ 0, 0 }, CellState::Untraversable);
    m.set({ 1, 1 }, CellState::Traversable);
    const auto bytes = export_pgm(m);
    CHECK(bytes == bytes_of("P5\n2 2\n255\n", { 205, 254, 0, 205 }));
    CHECK(bytes.size() == 11 + 4);

    const auto one = TraversabilityMap::create(0, 0, 0.1, 0.1, 0.1);
    CHECK(export_pgm(one) == bytes_of("P5\n1 1\n255\n", { 205 }));

    const auto big = TraversabilityMap::create(0, 0, 3, 6, 0.1);
    CHECK(export_pgm(big).size() == std::string("P5\n30 60\n255\n").size() + 1800);
}

TEST_CASE("pgm round trip")
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 1 + static_cast<int>(rng.below(40));
        const int h = 1 + static_cast<int>(rng.below(40));
        const auto m = random_map(rng, w, h);
        CHECK(import_pgm(export_pgm(m)) == m);
    }
}

TEST_CASE("pgm import thresholds and rejects garbage")
{
    const auto m = import_pgm(bytes_of("P5\n3 1\n255\n", { 251, 30, 128 }));
    CHECK(m.at({ 0, 0 }) == CellState::Traversable);
    CHECK(m.at({ 1, 0 }) == CellState::Untraversable);
    CHECK(m.at({ 2, 0 }) == CellState::Unknown);

    const auto commented = import_pgm(bytes_of("P5\n# map\n1 1\n255\n", { 0 }));
    CHECK(commented.at({ 0, 0 }) == CellState::Untraversable);

    CHECK_THROWS(import_pgm(bytes_of("P2\n1 1\n255\n", { 0 })));
    CHECK_THROWS(import_pgm(bytes_of("P5\n2 2\n255\n", { 0 })));
}
