#include "krlab/gf2.hpp"

#include <algorithm>
#include <bit>

namespace krlab::gf2 {

namespace {

std::size_t wordCount(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace

BitVector::BitVector(std::size_t length)
    : length_(length), words_(wordCount(length), 0) {}

BitVector BitVector::unit(std::size_t length, std::size_t index) {
  BitVector v(length);
  v.set(index);
  return v;
}

BitVector BitVector::fromString(const std::string& bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("bit string may only contain 0 and 1");
    }
  }
  return v;
}

void BitVector::set(std::size_t i, bool v) {
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (v) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

bool BitVector::isZero() const {
  return std::all_of(words_.begin(), words_.end(),
                     [](std::uint64_t w) { return w == 0; });
}

std::size_t BitVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitVector::lowestSet() const {
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if (words_[k] != 0) {
      return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
    }
  }
  return length_;
}

bool BitVector::dot(const BitVector& other) const {
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < words_.size(); ++k) acc ^= words_[k] & other.words_[k];
  return std::popcount(acc) & 1;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.length_ != length_) {
    throw std::invalid_argument("bit vector length mismatch");
  }
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
  return *this;
}

bool BitVector::operator<(const BitVector& other) const {
  if (length_ != other.length_) return length_ < other.length_;
  return words_ < other.words_;
}

BitVector BitVector::prefix(std::size_t n) const {
  BitVector out(n);
  for (std::size_t k = 0; k < out.words_.size(); ++k) out.words_[k] = words_[k];
  if (n % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (n % 64)) - 1;
  }
  return out;
}

std::string BitVector::toString() const {
  std::string s(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

BitMatrix::BitMatrix(std::size_t cols, std::vector<BitVector> rows) : cols_(cols) {
  for (auto& r : rows) addRow(std::move(r));
}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.addRow(BitVector::unit(n, i));
  return m;
}

BitMatrix BitMatrix::fromStrings(const std::vector<std::string>& rows) {
  if (rows.empty()) return BitMatrix(0);
  BitMatrix m(rows.front().size());
  for (const auto& r : rows) m.addRow(BitVector::fromString(r));
  return m;
}

void BitMatrix::addRow(BitVector r) {
  if (r.size() != cols_) {
    throw std::invalid_argument("row length does not match column count");
  }
  rows_.push_back(std::move(r));
}

BitMatrix BitMatrix::stacked(const BitMatrix& below) const {
  if (below.cols_ != cols_) {
    throw std::invalid_argument("column dimension mismatch");
  }
  BitMatrix out = *this;
  for (const auto& r : below.rows_) out.rows_.push_back(r);
  return out;
}

bool EchelonBasis::reduce(BitVector& v) const {
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (v.get(pivots_[k])) v ^= rows_[k];
  }
  return v.isZero();
}

bool EchelonBasis::insert(BitVector v) {
  if (v.size() != cols_) throw std::invalid_argument("row length mismatch");
  if (reduce(v)) return false;
  const std::size_t p = v.lowestSet();
  // Keep rows sorted by pivot and fully reduced on the new pivot column.
  for (auto& r : rows_) {
    if (r.get(p)) r ^= v;
  }
  auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), p);
  const auto idx = static_cast<std::size_t>(pos - pivots_.begin());
  pivots_.insert(pos, p);
  rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(v));
  return true;
}

std::size_t rank(const BitMatrix& m) {
  EchelonBasis b(m.colCount());
  for (const auto& r : m.rows()) b.insert(r);
  return b.rank();
}

std::size_t intersectionDim(const BitMatrix& a, const BitMatrix& b) {
  if (a.colCount() != b.colCount()) {
    throw std::invalid_argument("intersectionDim: column dimension mismatch");
  }
  return rank(a) + rank(b) - rank(a.stacked(b));
}

BitMatrix intersectionBasis(const BitMatrix& a, const BitMatrix& b) {
  const std::size_t c = a.colCount();
  if (b.colCount() != c) {
    throw std::invalid_argument("intersectionBasis: column dimension mismatch");
  }
  EchelonBasis e(2 * c);
  auto widen = [&](const BitVector& r, bool copyRight) {
    BitVector w(2 * c);
    for (std::size_t i = 0; i < c; ++i) {
      if (r.get(i)) {
        w.set(i);
        if (copyRight) w.set(c + i);
      }
    }
    return w;
  };
  for (const auto& r : a.rows()) e.insert(widen(r, true));
  for (const auto& r : b.rows()) e.insert(widen(r, false));
  BitMatrix out(c);
  for (std::size_t k = 0; k < e.rank(); ++k) {
    if (e.pivots()[k] < c) continue;
    BitVector right(c);
    for (std::size_t i = 0; i < c; ++i) right.set(i, e.rows()[k].get(c + i));
    out.addRow(std::move(right));
  }
  return out;
}

std::uint32_t irreducible(int m) {
  static constexpr std::uint32_t kPoly[] = {0,      0x3,   0x7,   0xB,  0x13,
                                            0x25, 0x43, 0x83, 0x11B};
  if (m < 1 || m > 8) throw std::invalid_argument("field degree must be in 1..8");
  return kPoly[m];
}

FieldElement fieldElement(int m, std::uint32_t value) {
  irreducible(m);
  if (value >> m) throw std::invalid_argument("field element out of range");
  return FieldElement{value, m};
}

static void requireSameDegree(const FieldElement& a, const FieldElement& b) {
  if (a.m != b.m) throw std::invalid_argument("field degree mismatch");
}

FieldElement fieldAdd(FieldElement a, FieldElement b) {
  requireSameDegree(a, b);
  return FieldElement{a.value ^ b.value, a.m};
}

FieldElement fieldMul(FieldElement a, FieldElement b) {
  requireSameDegree(a, b);
  const std::uint32_t poly = irreducible(a.m);
  std::uint32_t x = a.value;
  std::uint32_t y = b.value;
  std::uint32_t acc = 0;
  while (y != 0) {
    if (y & 1u) acc ^= x;
    y >>= 1;
    x <<= 1;
    if (x >> a.m) x ^= poly;
  }
  return FieldElement{acc, a.m};
}

FieldElement fieldPow(FieldElement a, std::uint64_t e) {
  FieldElement result{1, a.m};
  FieldElement base = a;
  while (e != 0) {
    if (e & 1u) result = fieldMul(result, base);
    base = fieldMul(base, base);
    e >>= 1;
  }
  return result;
}

FieldElement fieldInv(FieldElement a) {
  if (a.value == 0) throw std::invalid_argument("zero has no inverse");
  return fieldPow(a, (std::uint64_t{1} << a.m) - 2);
}

}  // namespace krlab::gf2
