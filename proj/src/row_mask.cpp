#include "ice/row_mask.hpp"

#include <stdexcept>

namespace ice {

namespace {

void require_same_size(const RowMask& a, const RowMask& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("row mask size mismatch");
  }
}

}  // namespace

RowMask::RowMask(std::size_t size, bool value)
    : size_(size),
      words_((size + kWordBits - 1) / kWordBits, value ? ~Word{0} : Word{0}) {
  clear_tail();
}

void RowMask::clear_tail() noexcept {
  const std::size_t tail = size_ % kWordBits;
  if (tail != 0 && !words_.empty()) {
    words_.back() &= (Word{1} << tail) - 1;
  }
}

std::size_t RowMask::count() const noexcept {
  std::size_t total = 0;
  for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

bool RowMask::any() const noexcept {
  for (Word w : words_) {
    if (w != 0) return true;
  }
  return false;
}

bool RowMask::is_subset_of(const RowMask& other) const {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  }
  return true;
}

bool RowMask::intersects(const RowMask& other) const {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & other.words_[i]) != 0) return true;
  }
  return false;
}

RowMask& RowMask::operator&=(const RowMask& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

RowMask& RowMask::operator|=(const RowMask& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

RowMask RowMask::operator~() const {
  RowMask out = *this;
  for (Word& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

std::vector<std::size_t> RowMask::rows() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each([&](std::size_t r) { out.push_back(r); });
  return out;
}

void intersect_into(RowMask& out, const RowMask& a, const RowMask& b,
                    const RowMask& c) {
  require_same_size(a, b);
  require_same_size(a, c);
  if (out.size() != a.size()) out = RowMask(a.size());
  auto& dst = out.words_;
  const auto& wa = a.words_;
  const auto& wb = b.words_;
  const auto& wc = c.words_;
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = wa[i] & wb[i] & wc[i];
}

}  // namespace ice
