#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace krlab::gf2 {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t length);

  static BitVector unit(std::size_t length, std::size_t index);
  static BitVector fromString(const std::string& bits);

  std::size_t size() const { return length_; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v = true);
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  bool isZero() const;
  std::size_t popcount() const;
  // Lowest set index, or size() when zero.
  std::size_t lowestSet() const;
  bool dot(const BitVector& other) const;

  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  bool operator==(const BitVector& other) const = default;
  bool operator<(const BitVector& other) const;

  // Copy of the first n bits.
  BitVector prefix(std::size_t n) const;
  std::string toString() const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(std::size_t cols) : cols_(cols) {}
  BitMatrix(std::size_t cols, std::vector<BitVector> rows);

  static BitMatrix identity(std::size_t n);
  static BitMatrix fromStrings(const std::vector<std::string>& rows);

  std::size_t rowCount() const { return rows_.size(); }
  std::size_t colCount() const { return cols_; }
  const BitVector& row(std::size_t i) const { return rows_[i]; }
  const std::vector<BitVector>& rows() const { return rows_; }

  void addRow(BitVector r);
  BitMatrix stacked(const BitMatrix& below) const;

 private:
  std::size_t cols_ = 0;
  std::vector<BitVector> rows_;
};

// Incremental row-echelon basis with lowest-column pivots.
class EchelonBasis {
 public:
  explicit EchelonBasis(std::size_t cols) : cols_(cols) {}

  // Reduces v in place; returns true when v lies in the span.
  bool reduce(BitVector& v) const;
  // Adds v; returns true when the rank increased.
  bool insert(BitVector v);
  bool contains(BitVector v) const { return reduce(v); }

  std::size_t rank() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  const std::vector<BitVector>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

 private:
  std::size_t cols_;
  std::vector<BitVector> rows_;
  std::vector<std::size_t> pivots_;
};

std::size_t rank(const BitMatrix& m);
std::size_t intersectionDim(const BitMatrix& a, const BitMatrix& b);
// Basis of rowspace(a) ∩ rowspace(b) (Zassenhaus), rows in pivot order.
BitMatrix intersectionBasis(const BitMatrix& a, const BitMatrix& b);

// GF(2^m), m in 1..8, reduced modulo a fixed irreducible per degree.
struct FieldElement {
  std::uint32_t value = 0;
  int m = 1;
  bool operator==(const FieldElement&) const = default;
};

std::uint32_t irreducible(int m);
FieldElement fieldElement(int m, std::uint32_t value);
FieldElement fieldAdd(FieldElement a, FieldElement b);
FieldElement fieldMul(FieldElement a, FieldElement b);
FieldElement fieldPow(FieldElement a, std::uint64_t e);
FieldElement fieldInv(FieldElement a);

}  // namespace krlab::gf2
