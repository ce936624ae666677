#ifndef TRAVMAP_GRIDMAP_HPP
#define TRAVMAP_GRIDMAP_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "travmap/geometry.hpp"

namespace travmap {

class OutOfBounds : public std::out_of_range
{
public:
    using std::out_of_range::out_of_range;
};

enum class CellState : std::uint8_t
{
    Traversable,
    Untraversable,
    Unknown,
};

const char* to_string(CellState s);

struct CellIndex
{
    int i = 0; /* column, along +x */
    int j = 0; /* row, along +y */

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/* Georeferencing of a grid: lower-left corner, cell size and cell counts */
struct MapGeometry
{
    Vec2 origin;
    double resolution = 0.10;
    int width = 0;
    int height = 0;

    friend bool operator==(const MapGeometry&, const MapGeometry&) = default;
};

/*
 * TraversabilityMap is a row-major grid of three-state cells over the
 * robot's plane. Every cell starts out Unknown.
 */
class TraversabilityMap
{
public:
    explicit TraversabilityMap(const MapGeometry& geometry);

    /* Grid covering [x_min, x_max] x [y_min, y_max], extents rounded up */
    static TraversabilityMap create(double x_min, double y_min,
                                    double x_max, double y_max,
                                    double resolution = 0.10);

    const MapGeometry& geometry() const { return mGeometry; }
    int width() const { return mGeometry.width; }
    int height() const { return mGeometry.height; }
    double resolution() const { return mGeometry.resolution; }
    Vec2 origin() const { return mGeometry.origin; }

    bool contains(const CellIndex& idx) const
    {
        return idx.i >= 0 && idx.i < mGeometry.width &&
               idx.j >= 0 && idx.j < mGeometry.height;
    }

    /* Throws OutOfBounds when p lies outside the grid */
    CellIndex world_to_cell(const Vec2& p) const;
    std::optional<CellIndex> try_world_to_cell(const Vec2& p) const;
    /* Center of the cell; right-inverse of world_to_cell */
    Vec2 cell_to_world(const CellIndex& idx) const;

    CellState at(const CellIndex& idx) const;
    /* Last writer wins */
    void set(const CellIndex& idx, CellState s);

    /* Set every cell whose center lies within half_width of segment ab */
    void mark_band(const Vec2& a, const Vec2& b, double half_width, CellState s);
    void mark_disk(const Vec2& c, double radius, CellState s)
    { this->mark_band(c, c, radius, s); }

    std::size_t count(CellState s) const;

    std::span<const CellState> cells() const { return mCells; }
    std::span<CellState> cells() { return mCells; }

    friend bool operator==(const TraversabilityMap&, const TraversabilityMap&) = default;

private:
    std::size_t offset(const CellIndex& idx) const
    {
        return static_cast<std::size_t>(idx.j) * mGeometry.width + idx.i;
    }

    MapGeometry            mGeometry;
    std::vector<CellState> mCells;
};

enum class Layer : std::uint8_t
{
    SfM,
    PfH,
    HO3,
};

const char* to_string(Layer l);
Layer parse_layer(std::string_view name);

/* Total order over fused layers; the last entry has the highest priority */
class LayerPriority
{
public:
    /* SfM < HO3 < PfH */
    LayerPriority();
    explicit LayerPriority(std::vector<Layer> lowest_to_highest);

    /* Accepts "sfm,ho3,pfh" or "sfm<ho3<pfh", lowest first */
    static LayerPriority parse(std::string_view text);

    /* Rank of a layer, higher wins; throws if the layer is not listed */
    int rank(Layer l) const;
    const std::vector<Layer>& order() const { return mOrder; }
    std::string to_string() const;

private:
    std::vector<Layer> mOrder;
};

struct LayeredMap
{
    const TraversabilityMap* map = nullptr;
    Layer layer = Layer::SfM;
};

/* Per cell, the known value of the highest-priority layer that has one */
TraversabilityMap fuse(std::span<const LayeredMap> layers,
                       const LayerPriority& priority);

/* Binary P5 image, 254 traversable / 0 untraversable / 205 unknown,
 * first image row is the highest grid row */
std::vector<std::uint8_t> export_pgm(const TraversabilityMap& map);

/* Inverse of export_pgm. Gray levels are thresholded like a map server:
 * values >= 250 traversable, <= 50 untraversable, otherwise unknown. */
TraversabilityMap import_pgm(std::span<const std::uint8_t> bytes,
                             const Vec2& origin = {}, double resolution = 0.10);

void write_pgm_file(const std::string& path, const TraversabilityMap& map);
TraversabilityMap read_pgm_file(const std::string& path,
                                const Vec2& origin = {}, double resolution = 0.10);

} // namespace travmap

#endif // TRAVMAP_GRIDMAP_HPP
