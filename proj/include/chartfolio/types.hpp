#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chartfolio {

inline constexpr int kNumClasses = 3;

/// Three-way label: C0 = no call, C1 = buy, C2 = sell.
enum class ClassLabel : std::uint8_t { C0 = 0, C1 = 1, C2 = 2 };

constexpr int index_of(ClassLabel c) noexcept { return static_cast<int>(c); }

inline ClassLabel label_from_index(int i) {
  if (i < 0 || i >= kNumClasses) {
    throw std::out_of_range("class index out of range: " + std::to_string(i));
  }
  return static_cast<ClassLabel>(i);
}

inline std::string to_string(ClassLabel c) { return std::to_string(index_of(c)); }

/// Accepts "0", "1", "2" or "C0", "C1", "C2".
std::optional<ClassLabel> parse_label(std::string_view text);

/// Bad user input: unreadable files, malformed rows, invalid configuration.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal invariant; indicates a bug rather than bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace chartfolio
