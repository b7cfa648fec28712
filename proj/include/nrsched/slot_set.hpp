#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nrsched {

// Fixed-size dynamic bitset over mini-slot indices. All set operations
// require both operands to have the same size.
class SlotSet {
 public:
  SlotSet() = default;
  explicit SlotSet(std::size_t size)
      : size_(size), words_((size + kWordBits - 1) / kWordBits, 0) {}

  std::size_t size() const { return size_; }

  void set(std::size_t i) { words_[i / kWordBits] |= bit(i); }
  void reset(std::size_t i) { words_[i / kWordBits] &= ~bit(i); }
  bool test(std::size_t i) const {
    return (words_[i / kWordBits] & bit(i)) != 0;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool none() const {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  bool intersects(const SlotSet& other) const {
    check_same(other);
    for (std::size_t w = 0; w < words_.size(); ++w)
      if ((words_[w] & other.words_[w]) != 0) return true;
    return false;
  }

  SlotSet& operator|=(const SlotSet& other) {
    check_same(other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
  }

  // Clears every bit that is set in `other`.
  SlotSet& subtract(const SlotSet& other) {
    check_same(other);
    for (std::size_t w = 0; w < words_.size(); ++w)
      words_[w] &= ~other.words_[w];
    return *this;
  }

  // Ascending list of set indices.
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t cur = words_[w];
      while (cur != 0) {
        const int off = std::countr_zero(cur);
        out.push_back(w * kWordBits + static_cast<std::size_t>(off));
        cur &= cur - 1;
      }
    }
    return out;
  }

  friend bool operator==(const SlotSet&, const SlotSet&) = default;

 private:
  static constexpr std::size_t kWordBits = 64;
  static std::uint64_t bit(std::size_t i) {
    return std::uint64_t{1} << (i % kWordBits);
  }
  void check_same(const SlotSet& other) const {
    if (other.size_ != size_)
      throw std::invalid_argument("SlotSet size mismatch");
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace nrsched
