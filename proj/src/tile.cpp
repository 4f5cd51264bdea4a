#include "cdc/tile.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "cdc/error.hpp"

namespace cdc {

namespace {

constexpr std::array<std::string_view, kTileCount> kNames = {"N",  "S",  "E",  "W", "NE",
                                                             "NW", "SE", "SW", "O"};

// Indexed by [y band][x band].
constexpr Tile kBandTable[3][3] = {
    {Tile::SW, Tile::S, Tile::SE},
    {Tile::W, Tile::O, Tile::E},
    {Tile::NW, Tile::N, Tile::NE},
};

bool tiles_connected(std::uint16_t mask) {
  const int start = std::countr_zero(mask);
  std::uint16_t seen = static_cast<std::uint16_t>(1U << start);
  std::uint16_t frontier = seen;
  while (frontier != 0) {
    const int t = std::countr_zero(frontier);
    frontier &= static_cast<std::uint16_t>(frontier - 1);
    const auto tile = static_cast<Tile>(t);
    const int x = static_cast<int>(x_band(tile));
    const int y = static_cast<int>(y_band(tile));
    constexpr int dx[] = {1, -1, 0, 0};
    constexpr int dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (nx < 0 || nx > 2 || ny < 0 || ny > 2) continue;
      const auto bit = static_cast<std::uint16_t>(1U << static_cast<int>(kBandTable[ny][nx]));
      if ((mask & bit) && !(seen & bit)) {
        seen |= bit;
        frontier |= bit;
      }
    }
  }
  return seen == mask;
}

}  // namespace

Tile tile_from_bands(Band x, Band y) noexcept {
  return kBandTable[static_cast<int>(y)][static_cast<int>(x)];
}

Band x_band(Tile t) noexcept {
  switch (t) {
    case Tile::W:
    case Tile::NW:
    case Tile::SW:
      return Band::Below;
    case Tile::E:
    case Tile::NE:
    case Tile::SE:
      return Band::Above;
    default:
      return Band::Inside;
  }
}

Band y_band(Tile t) noexcept {
  switch (t) {
    case Tile::S:
    case Tile::SE:
    case Tile::SW:
      return Band::Below;
    case Tile::N:
    case Tile::NE:
    case Tile::NW:
      return Band::Above;
    default:
      return Band::Inside;
  }
}

std::string_view tile_name(Tile t) noexcept { return kNames[static_cast<int>(t)]; }

std::optional<Tile> parse_tile(std::string_view text) noexcept {
  if (text.empty() || text.size() > 2) return std::nullopt;
  std::string upper;
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (int i = 0; i < kTileCount; ++i) {
    if (kNames[i] == upper) return static_cast<Tile>(i);
  }
  return std::nullopt;
}

BasicRelation::BasicRelation(std::uint16_t mask) : mask_(mask) {
  if (mask == 0 || mask > kFullMask) throw Error("basic relation must be a nonempty set of tiles");
}

BasicRelation BasicRelation::of(std::initializer_list<Tile> tiles) {
  std::uint16_t mask = 0;
  for (Tile t : tiles) mask |= static_cast<std::uint16_t>(1U << static_cast<int>(t));
  return BasicRelation(mask);
}

int BasicRelation::size() const noexcept { return std::popcount(mask_); }

std::vector<Tile> BasicRelation::tiles() const {
  std::vector<Tile> out;
  for (Tile t : kAllTiles) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

std::string BasicRelation::to_string() const {
  std::string out;
  for (Tile t : tiles()) {
    if (!out.empty()) out.push_back(':');
    out += tile_name(t);
  }
  return out;
}

std::string BasicRelation::to_lower_string() const {
  std::string out = to_string();
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

BasicRelation parse_basic_relation(std::string_view text) {
  std::uint16_t mask = 0;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = text.find(':', pos);
    const std::string_view part =
        text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos);
    const auto tile = parse_tile(part);
    if (!tile) throw Error("unknown tile '" + std::string(part) + "'");
    mask |= static_cast<std::uint16_t>(1U << static_cast<int>(*tile));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  return BasicRelation(mask);
}

bool canonical_less(BasicRelation a, BasicRelation b) noexcept {
  if (a.size() != b.size()) return a.size() < b.size();
  // Lexicographic over ascending tile indices.
  std::uint16_t x = a.mask();
  std::uint16_t y = b.mask();
  while (x != 0 && y != 0) {
    const int tx = std::countr_zero(x);
    const int ty = std::countr_zero(y);
    if (tx != ty) return tx < ty;
    x &= static_cast<std::uint16_t>(x - 1);
    y &= static_cast<std::uint16_t>(y - 1);
  }
  return false;
}

RelationSet RelationSet::all() {
  Bits b;
  b.set();
  return RelationSet(b);
}

RelationSet RelationSet::single(BasicRelation r) {
  RelationSet s;
  s.insert(r);
  return s;
}

const RelationSet& RelationSet::connected_realizable() {
  static const RelationSet set = [] {
    RelationSet s;
    for (std::uint16_t m = 1; m <= BasicRelation::kFullMask; ++m) {
      if (tiles_connected(m)) s.insert(BasicRelation(m));
    }
    return s;
  }();
  return set;
}

std::vector<BasicRelation> RelationSet::sorted() const {
  std::vector<BasicRelation> out;
  for (std::uint16_t m = 1; m <= BasicRelation::kFullMask; ++m) {
    if (bits_.test(m)) out.emplace_back(m);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

}  // namespace cdc
