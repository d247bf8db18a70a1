#include "bisent/sentiment_class.hpp"

#include <stdexcept>
#include <string>

namespace bisent {
namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "strong_neg", "mod_neg", "weak_neg", "neutral", "weak_pos", "mod_pos", "strong_pos",
};

}  // namespace

SentimentClass class_from_index(std::size_t index) {
  if (index >= kNumClasses) throw std::out_of_range("class index " + std::to_string(index));
  return static_cast<SentimentClass>(index);
}

SentimentClass class_from_weight(int weight) {
  if (weight < -3 || weight > 3) throw std::out_of_range("class weight " + std::to_string(weight));
  return static_cast<SentimentClass>(weight + 3);
}

std::string_view class_name(SentimentClass c) { return kNames[class_index(c)]; }

std::optional<SentimentClass> parse_class(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kNames[i] == name) return static_cast<SentimentClass>(i);
  }
  return std::nullopt;
}

}  // namespace bisent
