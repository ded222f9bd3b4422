#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace itemseg {

/// The closed set of 10-K item identifiers, declared in canonical report order.
enum class Item : std::uint8_t {
  k1, k1A, k1B, k1C, k2, k3, k4, k5, k6, k7, k7A,
  k8, k9, k9A, k9B, k10, k11, k12, k13, k14, k15, k16,
};

inline constexpr std::size_t kItemCount = 22;

inline constexpr std::array<Item, kItemCount> kAllItems = {
    Item::k1,  Item::k1A, Item::k1B, Item::k1C, Item::k2,  Item::k3,
    Item::k4,  Item::k5,  Item::k6,  Item::k7,  Item::k7A, Item::k8,
    Item::k9,  Item::k9A, Item::k9B, Item::k10, Item::k11, Item::k12,
    Item::k13, Item::k14, Item::k15, Item::k16,
};

constexpr std::size_t canonical_index(Item item) { return static_cast<std::size_t>(item); }

constexpr bool item_before(Item a, Item b) { return canonical_index(a) < canonical_index(b); }

/// "1", "1A", ... "16".
std::string_view to_string(Item item);

/// Case-insensitive; surrounding whitespace is not accepted.
std::optional<Item> parse_item(std::string_view text);

/// Title as printed in the SEC form instructions, e.g. "Risk Factors".
std::string_view canonical_title(Item item);

}  // namespace itemseg
