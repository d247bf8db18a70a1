#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace bisent {

// Seven-way message polarity. The enumerator order is the class index used
// by the network and the confusion matrix: index = weight + 3.
enum class SentimentClass : std::uint8_t {
  StrongNeg,
  ModNeg,
  WeakNeg,
  Neutral,
  WeakPos,
  ModPos,
  StrongPos,
};

inline constexpr std::size_t kNumClasses = 7;

inline constexpr std::array<SentimentClass, kNumClasses> kAllClasses = {
    SentimentClass::StrongNeg, SentimentClass::ModNeg, SentimentClass::WeakNeg,
    SentimentClass::Neutral,   SentimentClass::WeakPos, SentimentClass::ModPos,
    SentimentClass::StrongPos,
};

constexpr std::size_t class_index(SentimentClass c) { return static_cast<std::size_t>(c); }

// Throws std::out_of_range for index >= 7.
SentimentClass class_from_index(std::size_t index);

// Integer weight in -3..+3.
constexpr int class_weight(SentimentClass c) { return static_cast<int>(c) - 3; }

// Inverse of class_weight. Throws std::out_of_range outside -3..+3.
SentimentClass class_from_weight(int weight);

// Stable wire names: strong_neg, mod_neg, weak_neg, neutral, weak_pos,
// mod_pos, strong_pos.
std::string_view class_name(SentimentClass c);
std::optional<SentimentClass> parse_class(std::string_view name);

}  // namespace bisent
