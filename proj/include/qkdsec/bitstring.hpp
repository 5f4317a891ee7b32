#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdsec {

// Packed bit sequence; bit i lives in word i / 64 at position i % 64.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  static BitString from_string(const std::string& s) {
    BitString b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bit string may only contain 0 and 1");
      b.set(i, s[i] == '1');
    }
    return b;
  }

  // Low `n` bits of v, most significant first.
  static BitString from_uint(std::uint64_t v, std::size_t n) {
    BitString b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, (v >> (n - 1 - i)) & 1U);
    return b;
  }

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  const std::vector<std::uint64_t>& words() const { return w_; }

  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  void push_back(bool v) {
    if ((n_ & 63) == 0) w_.push_back(0);
    ++n_;
    set(n_ - 1, v);
  }

  BitString& operator^=(const BitString& o) {
    if (o.n_ != n_) throw std::invalid_argument("xor of bit strings with different lengths");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
  }
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }

  BitString& operator&=(const BitString& o) {
    if (o.n_ != n_) throw std::invalid_argument("and of bit strings with different lengths");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  friend BitString operator&(BitString a, const BitString& b) { return a &= b; }

  friend bool operator==(const BitString& a, const BitString& b) { return a.n_ == b.n_ && a.w_ == b.w_; }

  std::size_t weight() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool parity() const { return weight() & 1U; }

  // Parity of the bitwise AND with o.
  bool dot(const BitString& o) const {
    if (o.n_ != n_) throw std::invalid_argument("dot product of bit strings with different lengths");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) acc ^= w_[i] & o.w_[i];
    return std::popcount(acc) & 1;
  }

  BitString slice(std::size_t pos, std::size_t len) const {
    if (pos > n_ || len > n_ - pos) throw std::out_of_range("bit string slice out of range");
    BitString out(len);
    const std::size_t shift = pos & 63;
    const std::size_t base = pos >> 6;
    for (std::size_t k = 0; k < out.w_.size(); ++k) {
      std::uint64_t v = w_[base + k] >> shift;
      if (shift != 0 && base + k + 1 < w_.size()) v |= w_[base + k + 1] << (64 - shift);
      out.w_[k] = v;
    }
    out.mask_tail();
    return out;
  }

  BitString reversed() const {
    BitString out(n_);
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) out.set(n_ - 1 - i, true);
    return out;
  }

  void append(const BitString& o) {
    for (std::size_t i = 0; i < o.n_; ++i) push_back(o.get(i));
  }

  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  // Bit 0 is the most significant bit of the first hex digit; the tail is zero-padded.
  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < n_; i += 4) {
      unsigned v = 0;
      for (std::size_t j = 0; j < 4; ++j) v = (v << 1) | ((i + j < n_ && get(i + j)) ? 1U : 0U);
      s.push_back(digits[v]);
    }
    return s;
  }

 private:
  void mask_tail() {
    if ((n_ & 63) != 0 && !w_.empty()) w_.back() &= (std::uint64_t{1} << (n_ & 63)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

}  // namespace qkdsec
