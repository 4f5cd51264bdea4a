#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdc {

/// The nine tiles induced by a reference bounding box, in canonical order.
enum class Tile : std::uint8_t { N, S, E, W, NE, NW, SE, SW, O };

inline constexpr int kTileCount = 9;
inline constexpr std::array<Tile, kTileCount> kAllTiles = {
    Tile::N, Tile::S, Tile::E, Tile::W, Tile::NE, Tile::NW, Tile::SE, Tile::SW, Tile::O};

/// Position of a coordinate relative to an inclusive interval.
enum class Band : std::uint8_t { Below = 0, Inside = 1, Above = 2 };

Tile tile_from_bands(Band x, Band y) noexcept;
Band x_band(Tile t) noexcept;
Band y_band(Tile t) noexcept;

std::string_view tile_name(Tile t) noexcept;
/// Case-insensitive lookup.
std::optional<Tile> parse_tile(std::string_view text) noexcept;

/// A nonempty set of tiles.
class BasicRelation {
 public:
  static constexpr std::uint16_t kFullMask = 0x1FF;

  constexpr BasicRelation() = default;
  /// Throws cdc::Error when the mask is empty or out of range.
  explicit BasicRelation(std::uint16_t mask);
  static BasicRelation of(std::initializer_list<Tile> tiles);

  constexpr std::uint16_t mask() const noexcept { return mask_; }
  bool contains(Tile t) const noexcept { return (mask_ >> static_cast<int>(t)) & 1U; }
  int size() const noexcept;
  std::vector<Tile> tiles() const;

  /// Upper-case tile names joined by ':' in canonical tile order.
  std::string to_string() const;
  std::string to_lower_string() const;

  friend constexpr bool operator==(BasicRelation, BasicRelation) = default;

 private:
  std::uint16_t mask_ = 1;
};

/// Parses "NE:E" style text. Throws cdc::Error naming the unknown tile.
BasicRelation parse_basic_relation(std::string_view text);

/// Canonical sort order: fewer tiles first, then lexicographic in tile order.
bool canonical_less(BasicRelation a, BasicRelation b) noexcept;

/// A set of basic relations, indexed by tile mask.
class RelationSet {
 public:
  using Bits = std::bitset<512>;

  RelationSet() = default;
  explicit RelationSet(const Bits& bits) : bits_(bits) { bits_.reset(0); }

  static RelationSet all();
  static RelationSet single(BasicRelation r);
  /// Every basic relation whose tiles form a 4-connected set of the 3x3 tile grid.
  static const RelationSet& connected_realizable();

  void insert(BasicRelation r) { bits_.set(r.mask()); }
  bool contains(BasicRelation r) const { return bits_.test(r.mask()); }
  bool contains_mask(std::uint16_t mask) const { return bits_.test(mask); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  RelationSet complement() const { return RelationSet(~bits_); }
  RelationSet operator&(const RelationSet& o) const { return RelationSet(bits_ & o.bits_); }
  RelationSet operator|(const RelationSet& o) const { return RelationSet(bits_ | o.bits_); }
  RelationSet& operator|=(const RelationSet& o) {
    bits_ |= o.bits_;
    return *this;
  }
  bool intersects(const RelationSet& o) const { return (bits_ & o.bits_).any(); }
  bool is_subset_of(const RelationSet& o) const { return (bits_ & ~o.bits_).none(); }

  const Bits& bits() const { return bits_; }
  /// Members in canonical order.
  std::vector<BasicRelation> sorted() const;

  friend bool operator==(const RelationSet&, const RelationSet&) = default;

 private:
  Bits bits_;
};

}  // namespace cdc
