#include "travmap/gridmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace travmap {

namespace {

/* Slack for closed containment tests against cell centers */
constexpr double kContainEps = 1e-9;

constexpr std::uint8_t kPgmTraversable = 254;
constexpr std::uint8_t kPgmUntraversable = 0;
constexpr std::uint8_t kPgmUnknown = 205;

int cell_count(double extent, double resolution)
{
    /* 3.0 / 0.1 may land a hair above 30 */
    const double n = extent / resolution;
    return static_cast<int>(std::ceil(n - 1e-9 * std::max(1.0, n)));
}

} // namespace

const char* to_string(CellState s)
{
    switch (s) {
    case CellState::Traversable: return "traversable";
    case CellState::Untraversable: return "untraversable";
    case CellState::Unknown: return "unknown";
    }
    return "?";
}

TraversabilityMap::TraversabilityMap(const MapGeometry& geometry)
    : mGeometry(geometry)
{
    if (!(geometry.resolution > 0.0) || geometry.width <= 0 || geometry.height <= 0)
        throw std::invalid_argument("map geometry must have positive size and resolution");
    mCells.assign(static_cast<std::size_t>(geometry.width) * geometry.height,
                  CellState::Unknown);
}

TraversabilityMap TraversabilityMap::create(double x_min, double y_min,
                                            double x_max, double y_max,
                                            double resolution)
{
    if (!(x_max > x_min) || !(y_max > y_min))
        throw std::invalid_argument("map extent must be positive");
    if (!(resolution > 0.0))
        throw std::invalid_argument("map resolution must be positive");

    MapGeometry g;
    g.origin = { x_min, y_min };
    g.resolution = resolution;
    g.width = cell_count(x_max - x_min, resolution);
    g.height = cell_count(y_max - y_min, resolution);
    return TraversabilityMap(g);
}

std::optional<CellIndex> TraversabilityMap::try_world_to_cell(const Vec2& p) const
{
    const double fi = std::floor((p.x - mGeometry.origin.x) / mGeometry.resolution);
    const double fj = std::floor((p.y - mGeometry.origin.y) / mGeometry.resolution);
    if (fi < 0.0 || fj < 0.0 || fi >= mGeometry.width || fj >= mGeometry.height)
        return std::nullopt;
    return CellIndex { static_cast<int>(fi), static_cast<int>(fj) };
}

CellIndex TraversabilityMap::world_to_cell(const Vec2& p) const
{
    if (auto idx = this->try_world_to_cell(p))
        return *idx;
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") is outside the map";
    throw OutOfBounds(os.str());
}

Vec2 TraversabilityMap::cell_to_world(const CellIndex& idx) const
{
    return { mGeometry.origin.x + (idx.i + 0.5) * mGeometry.resolution,
             mGeometry.origin.y + (idx.j + 0.5) * mGeometry.resolution };
}

CellState TraversabilityMap::at(const CellIndex& idx) const
{
    if (!this->contains(idx))
        throw OutOfBounds("cell index out of bounds");
    return mCells[this->offset(idx)];
}

void TraversabilityMap::set(const CellIndex& idx, CellState s)
{
    if (!this->contains(idx))
        throw OutOfBounds("cell index out of bounds");
    mCells[this->offset(idx)] = s;
}

void TraversabilityMap::mark_band(const Vec2& a, const Vec2& b,
                                  double half_width, CellState s)
{
    if (half_width < 0.0)
        throw std::invalid_argument("band half width must be non-negative");

    /* Candidate cells: bounding box of the capsule, clipped to the grid */
    const double res = mGeometry.resolution;
    const auto lo_i = static_cast<int>(std::floor(
        (std::min(a.x, b.x) - half_width - mGeometry.origin.x) / res)) - 1;
    const auto hi_i = static_cast<int>(std::floor(
        (std::max(a.x, b.x) + half_width - mGeometry.origin.x) / res)) + 1;
    const auto lo_j = static_cast<int>(std::floor(
        (std::min(a.y, b.y) - half_width - mGeometry.origin.y) / res)) - 1;
    const auto hi_j = static_cast<int>(std::floor(
        (std::max(a.y, b.y) + half_width - mGeometry.origin.y) / res)) + 1;

    const int i0 = std::max(lo_i, 0);
    const int i1 = std::min(hi_i, mGeometry.width - 1);
    const int j0 = std::max(lo_j, 0);
    const int j1 = std::min(hi_j, mGeometry.height - 1);

    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const CellIndex idx { i, j };
            if (point_segment_distance(this->cell_to_world(idx), a, b) <=
                half_width + kContainEps)
                mCells[this->offset(idx)] = s;
        }
}

std::size_t TraversabilityMap::count(CellState s) const
{
    return static_cast<std::size_t>(std::count(mCells.begin(), mCells.end(), s));
}

const char* to_string(Layer l)
{
    switch (l) {
    case Layer::SfM: return "SfM";
    case Layer::PfH: return "PfH";
    case Layer::HO3: return "HO3";
    }
    return "?";
}

Layer parse_layer(std::string_view name)
{
    std::string lower;
    for (char c : name)
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "sfm")
        return Layer::SfM;
    if (lower == "pfh")
        return Layer::PfH;
    if (lower == "ho3")
        return Layer::HO3;
    throw std::invalid_argument("unknown layer '" + std::string(name) + "'");
}

LayerPriority::LayerPriority()
    : LayerPriority({ Layer::SfM, Layer::HO3, Layer::PfH }) { }

LayerPriority::LayerPriority(std::vector<Layer> lowest_to_highest)
    : mOrder(std::move(lowest_to_highest))
{
    if (mOrder.empty())
        throw std::invalid_argument("layer priority must list at least one layer");
    for (std::size_t a = 0; a < mOrder.size(); ++a)
        for (std::size_t b = a + 1; b < mOrder.size(); ++b)
            if (mOrder[a] == mOrder[b])
                throw std::invalid_argument(
                    std::string("duplicate layer in priority: ") + travmap::to_string(mOrder[a]));
}

LayerPriority LayerPriority::parse(std::string_view text)
{
    std::vector<Layer> order;
    std::string token;
    auto flush = [&]() {
        std::string t;
        for (char c : token)
            if (!std::isspace(static_cast<unsigned char>(c)))
                t.push_back(c);
        if (!t.empty())
            order.push_back(parse_layer(t));
        else if (!token.empty() || !order.empty())
            throw std::invalid_argument("empty entry in layer priority");
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == '<')
            flush();
        else
            token.push_back(c);
    }
    flush();
    return LayerPriority(std::move(order));
}

int LayerPriority::rank(Layer l) const
{
    for (std::size_t k = 0; k < mOrder.size(); ++k)
        if (mOrder[k] == l)
            return static_cast<int>(k);
    throw std::invalid_argument(std::string("layer ") + travmap::to_string(l) +
                                " has no priority");
}

std::string LayerPriority::to_string() const
{
    std::string s;
    for (std::size_t k = 0; k < mOrder.size(); ++k) {
        if (k)
            s += ',';
        s += travmap::to_string(mOrder[k]);
    }
    return s;
}

TraversabilityMap fuse(std::span<const LayeredMap> layers,
                       const LayerPriority& priority)
{
    if (layers.empty())
        throw std::invalid_argument("fuse needs at least one layer");

    const MapGeometry& g = layers.front().map->geometry();
    for (const auto& l : layers)
        if (!(l.map->geometry() == g))
            throw std::invalid_argument("fused layers must share geometry");

    /* Stable order by rank so permuting the input cannot change the result */
    std::vector<LayeredMap> ordered(layers.begin(), layers.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [&](const LayeredMap& a, const LayeredMap& b) {
                         return priority.rank(a.layer) > priority.rank(b.layer);
                     });

    TraversabilityMap out(g);
    auto dst = out.cells();
    for (std::size_t c = 0; c < dst.size(); ++c)
        for (const auto& l : ordered) {
            const CellState s = l.map->cells()[c];
            if (s != CellState::Unknown) {
                dst[c] = s;
                break;
            }
        }
    return out;
}

std::vector<std::uint8_t> export_pgm(const TraversabilityMap& map)
{
    const std::string header = "P5\n" + std::to_string(map.width()) + " " +
                               std::to_string(map.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + map.cells().size());

    for (int j = map.height() - 1; j >= 0; --j)
        for (int i = 0; i < map.width(); ++i) {
            switch (map.at({ i, j })) {
            case CellState::Traversable: bytes.push_back(kPgmTraversable); break;
            case CellState::Untraversable: bytes.push_back(kPgmUntraversable); break;
            case CellState::Unknown: bytes.push_back(kPgmUnknown); break;
            }
        }
    return bytes;
}

TraversabilityMap import_pgm(std::span<const std::uint8_t> bytes,
                             const Vec2& origin, double resolution)
{
    /* Header: magic, width, height, maxval separated by whitespace,
     * '#' comments allowed, exactly one whitespace byte before pixels */
    std::size_t pos = 0;
    auto skip_space = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_token = [&]() {
        skip_space();
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos]))
            t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    auto read_int = [&](const char* what) {
        const std::string t = read_token();
        if (t.empty() || !std::all_of(t.begin(), t.end(),
                                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw std::invalid_argument(std::string("malformed PGM ") + what);
        return std::stoi(t);
    };

    if (read_token() != "P5")
        throw std::invalid_argument("not a binary PGM (P5) image");
    const int width = read_int("width");
    const int height = read_int("height");
    const int maxval = read_int("maxval");
    if (maxval != 255)
        throw std::invalid_argument("only 8-bit PGM images are supported");
    ++pos;

    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (bytes.size() < pos || bytes.size() - pos != n)
        throw std::invalid_argument("PGM pixel data has the wrong length");

    MapGeometry g { origin, resolution, width, height };
    TraversabilityMap map(g);
    for (int row = 0; row < height; ++row)
        for (int i = 0; i < width; ++i) {
            const std::uint8_t px = bytes[pos + static_cast<std::size_t>(row) * width + i];
            CellState s = CellState::Unknown;
            if (px >= 250)
                s = CellState::Traversable;
            else if (px <= 50)
                s = CellState::Untraversable;
            map.set({ i, height - 1 - row }, s);
        }
    return map;
}

void write_pgm_file(const std::string& path, const TraversabilityMap& map)
{
    const auto bytes = export_pgm(map);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

TraversabilityMap read_pgm_file(const std::string& path,
                                const Vec2& origin, double resolution)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return import_pgm(bytes, origin, resolution);
}

} // namespace travmap
