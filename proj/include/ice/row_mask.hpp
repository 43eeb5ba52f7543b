#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ice {

/// Fixed-length bitset over dataset rows. Bit r is set when row r belongs to
/// the set. Bits past size() are always zero.
class RowMask {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  RowMask() = default;
  explicit RowMask(std::size_t size, bool value = false);

  static RowMask all(std::size_t size) { return RowMask(size, true); }
  static RowMask none(std::size_t size) { return RowMask(size, false); }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool test(std::size_t row) const noexcept {
    return (words_[row / kWordBits] >> (row % kWordBits)) & Word{1};
  }
  void set(std::size_t row) noexcept {
    words_[row / kWordBits] |= Word{1} << (row % kWordBits);
  }
  void reset(std::size_t row) noexcept {
    words_[row / kWordBits] &= ~(Word{1} << (row % kWordBits));
  }

  std::size_t count() const noexcept;
  bool any() const noexcept;
  bool is_subset_of(const RowMask& other) const;
  bool intersects(const RowMask& other) const;

  RowMask& operator&=(const RowMask& other);
  RowMask& operator|=(const RowMask& other);
  friend RowMask operator&(RowMask a, const RowMask& b) { return a &= b; }
  friend RowMask operator|(RowMask a, const RowMask& b) { return a |= b; }
  RowMask operator~() const;

  bool operator==(const RowMask& other) const = default;

  /// Calls fn(row) for every set bit, in increasing row order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      Word bits = words_[w];
      while (bits != 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(bits));
        fn(w * kWordBits + bit);
        bits &= bits - 1;
      }
    }
  }

  std::vector<std::size_t> rows() const;

  const std::vector<Word>& words() const noexcept { return words_; }

 private:
  friend void intersect_into(RowMask& out, const RowMask& a, const RowMask& b,
                             const RowMask& c);

  void clear_tail() noexcept;

  std::size_t size_ = 0;
  std::vector<Word> words_;
};

/// Writes a & b & c into out without allocating when out already has the
/// right size.
void intersect_into(RowMask& out, const RowMask& a, const RowMask& b,
                    const RowMask& c);

}  // namespace ice
