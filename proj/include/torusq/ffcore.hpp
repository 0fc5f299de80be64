#pragma once

/**
 * @file ffcore.hpp
 * @brief Exact arithmetic over Z and F_p.
 *
 * Residues are machine words reduced to [0, p). Integer matrices and
 * polynomials in the classical layer are arbitrary precision, since powers
 * of a hyperbolic symplectic matrix overflow 64 bits after a few dozen steps.
 */

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace torusq {

using BigInt = boost::multiprecision::cpp_int;
using Residue = std::int64_t;

// ---------------------------------------------------------------------------
// scalar arithmetic mod p
// ---------------------------------------------------------------------------

inline Residue mod(Residue a, Residue p) {
  Residue r = a % p;
  return r < 0 ? r + p : r;
}

inline Residue mod(const BigInt& a, Residue p) {
  BigInt r = a % p;
  if (r < 0) r += p;
  return static_cast<Residue>(r);
}

inline Residue pow_mod(Residue base, std::uint64_t e, Residue p) {
  Residue result = 1 % p;
  base = mod(base, p);
  while (e > 0) {
    if (e & 1U) result = result * base % p;
    base = base * base % p;
    e >>= 1U;
  }
  return result;
}

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline Residue inv_mod(Residue a, Residue p) {
  a = mod(a, p);
  if (a == 0) throw std::domain_error("inv_mod: zero has no inverse");
  // extended Euclid; p need not be prime here, only gcd(a, p) = 1
  Residue old_r = a, r = p, old_s = 1, s = 0;
  while (r != 0) {
    Residue q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  if (old_r != 1) throw std::domain_error("inv_mod: not invertible");
  return mod(old_s, p);
}

/// Quadratic residue symbol of a modulo an odd prime p.
inline int legendre(Residue a, Residue p) {
  if (p < 3 || !is_prime(p))
    throw std::invalid_argument("legendre: modulus must be an odd prime");
  a = mod(a, p);
  if (a == 0) return 0;
  return pow_mod(a, static_cast<std::uint64_t>((p - 1) / 2), p) == 1 ? 1 : -1;
}

/// The Planck parameter 1/p together with the half-dimension n.
class PrimeModulus {
 public:
  PrimeModulus(Residue p, int n) : p_(p), n_(n) {
    if (p < 3 || !is_prime(p))
      throw std::invalid_argument("PrimeModulus: p must be an odd prime, got " + std::to_string(p));
    if (n < 1) throw std::invalid_argument("PrimeModulus: n must be positive");
    nu_ = (p + 1) / 2;
    dim_ = 1;
    for (int i = 0; i < n; ++i) dim_ *= static_cast<std::size_t>(p);
  }

  Residue p() const { return p_; }
  int n() const { return n_; }
  /// (p+1)/2, the inverse of 2 mod p.
  Residue nu() const { return nu_; }
  /// p^n, the dimension of the quantum space.
  std::size_t dim() const { return dim_; }
  Residue reduce(Residue a) const { return mod(a, p_); }
  Residue reduce(const BigInt& a) const { return mod(a, p_); }
  Residue inv(Residue a) const { return inv_mod(a, p_); }

 private:
  Residue p_;
  int n_;
  Residue nu_;
  std::size_t dim_;
};

// ---------------------------------------------------------------------------
// matrices over F_p
// ---------------------------------------------------------------------------

class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(std::size_t rows, std::size_t cols, Residue p)
      : rows_(rows), cols_(cols), p_(p), data_(rows * cols, 0) {}
  FpMatrix(std::size_t rows, std::size_t cols, Residue p, const std::vector<Residue>& entries)
      : rows_(rows), cols_(cols), p_(p), data_(entries) {
    if (entries.size() != rows * cols) throw std::invalid_argument("FpMatrix: entry count mismatch");
    for (auto& e : data_) e = mod(e, p_);
  }

  static FpMatrix identity(std::size_t n, Residue p) {
    FpMatrix m(n, n, p);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Residue modulus() const { return p_; }
  const std::vector<Residue>& entries() const { return data_; }

  Residue operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  Residue& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Residue v) { data_[r * cols_ + c] = mod(v, p_); }

  friend FpMatrix operator*(const FpMatrix& a, const FpMatrix& b) {
    if (a.cols_ != b.rows_ || a.p_ != b.p_) throw std::invalid_argument("FpMatrix: shape mismatch");
    FpMatrix out(a.rows_, b.cols_, a.p_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        Residue aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) = (out(i, j) + aik * b(k, j)) % a.p_;
      }
    return out;
  }

  friend FpMatrix operator+(const FpMatrix& a, const FpMatrix& b) {
    FpMatrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] = (a.data_[i] + b.data_[i]) % a.p_;
    return out;
  }

  friend FpMatrix operator-(const FpMatrix& a, const FpMatrix& b) {
    FpMatrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] = mod(a.data_[i] - b.data_[i], a.p_);
    return out;
  }

  FpMatrix scaled(Residue s) const {
    FpMatrix out = *this;
    s = mod(s, p_);
    for (auto& e : out.data_) e = e * s % p_;
    return out;
  }

  std::vector<Residue> apply(const std::vector<Residue>& v) const {
    std::vector<Residue> out(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      Residue acc = 0;
      for (std::size_t j = 0; j < cols_; ++j) acc = (acc + (*this)(i, j) * mod(v[j], p_)) % p_;
      out[i] = acc;
    }
    return out;
  }

  FpMatrix transpose() const {
    FpMatrix out(cols_, rows_, p_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  FpMatrix pow(std::uint64_t e) const {
    FpMatrix result = identity(rows_, p_), base = *this;
    while (e > 0) {
      if (e & 1U) result = result * base;
      base = base * base;
      e >>= 1U;
    }
    return result;
  }

  /// Row echelon form in place; returns (rank, determinant of the square part when applicable).
  std::pair<std::size_t, Residue> eliminate(FpMatrix* companion = nullptr) {
    std::size_t rank = 0;
    Residue det = 1;
    for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
      std::size_t piv = rank;
      while (piv < rows_ && (*this)(piv, c) == 0) ++piv;
      if (piv == rows_) {
        det = 0;
        continue;
      }
      if (piv != rank) {
        swap_rows(piv, rank);
        if (companion) companion->swap_rows(piv, rank);
        det = mod(-det, p_);
      }
      Residue pv = (*this)(rank, c);
      det = det * pv % p_;
      Residue pinv = inv_mod(pv, p_);
      scale_row(rank, pinv);
      if (companion) companion->scale_row(rank, pinv);
      for (std::size_t r = 0; r < rows_; ++r) {
        if (r == rank || (*this)(r, c) == 0) continue;
        Residue f = (*this)(r, c);
        axpy_row(r, rank, mod(-f, p_));
        if (companion) companion->axpy_row(r, rank, mod(-f, p_));
      }
      ++rank;
    }
    if (rank < rows_ || rows_ != cols_) det = 0;
    return {rank, det};
  }

  std::size_t rank() const {
    FpMatrix copy = *this;
    return copy.eliminate().first;
  }

  Residue det() const {
    if (rows_ != cols_) throw std::invalid_argument("FpMatrix::det: not square");
    FpMatrix copy = *this;
    return copy.eliminate().second;
  }

  bool invertible() const { return rows_ == cols_ && det() != 0; }

  FpMatrix inverse() const {
    if (rows_ != cols_) throw std::invalid_argument("FpMatrix::inverse: not square");
    FpMatrix copy = *this;
    FpMatrix inv = identity(rows_, p_);
    auto [rk, d] = copy.eliminate(&inv);
    if (rk != rows_) throw std::domain_error("FpMatrix::inverse: singular matrix");
    (void)d;
    return inv;
  }

  /// Basis of the right kernel {v : M v = 0}.
  std::vector<std::vector<Residue>> kernel() const {
    FpMatrix ech = *this;
    ech.eliminate();
    std::vector<std::size_t> pivot_col;
    std::vector<bool> is_pivot(cols_, false);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::size_t c = 0;
      while (c < cols_ && ech(r, c) == 0) ++c;
      if (c == cols_) break;
      pivot_col.push_back(c);
      is_pivot[c] = true;
    }
    std::vector<std::vector<Residue>> basis;
    for (std::size_t free = 0; free < cols_; ++free) {
      if (is_pivot[free]) continue;
      std::vector<Residue> v(cols_, 0);
      v[free] = 1;
      for (std::size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = mod(-ech(r, free), p_);
      basis.push_back(std::move(v));
    }
    return basis;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](Residue e) { return e == 0; });
  }

  friend bool operator==(const FpMatrix& a, const FpMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.p_ == b.p_ && a.data_ == b.data_;
  }
  friend bool operator!=(const FpMatrix& a, const FpMatrix& b) { return !(a == b); }
  friend bool operator<(const FpMatrix& a, const FpMatrix& b) {
    if (a.rows_ != b.rows_) return a.rows_ < b.rows_;
    if (a.cols_ != b.cols_) return a.cols_ < b.cols_;
    return a.data_ < b.data_;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
      os << (i ? ";" : "");
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
    }
    os << ']';
    return os.str();
  }

 private:
  void swap_rows(std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void scale_row(std::size_t r, Residue s) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(r, j) = (*this)(r, j) * s % p_;
  }
  // row[dst] += s * row[src]
  void axpy_row(std::size_t dst, std::size_t src, Residue s) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) = ((*this)(dst, j) + s * (*this)(src, j)) % p_;
  }

  std::size_t rows_ = 0, cols_ = 0;
  Residue p_ = 2;
  std::vector<Residue> data_;
};

inline std::ostream& operator<<(std::ostream& os, const FpMatrix& m) { return os << m.str(); }

// ---------------------------------------------------------------------------
// integer matrices and symplectic structure
// ---------------------------------------------------------------------------

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  IntMatrix(std::size_t rows, std::size_t cols, const std::vector<long long>& entries)
      : rows_(rows), cols_(cols), data_(entries.begin(), entries.end()) {
    if (entries.size() != rows * cols) throw std::invalid_argument("IntMatrix: entry count mismatch");
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  /// The row-major entries of a square matrix, e.g. "2,1,1,1".
  static IntMatrix parse_square(const std::string& text) {
    std::vector<long long> vals;
    std::string tok;
    std::istringstream is(text);
    while (std::getline(is, tok, ',')) {
      tok.erase(std::remove_if(tok.begin(), tok.end(), [](char ch) { return ch == ' ' || ch == '[' || ch == ']' || ch == ';'; }),
                tok.end());
      if (tok.empty()) continue;
      std::size_t used = 0;
      long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("IntMatrix::parse_square: bad entry '" + tok + "'");
      vals.push_back(v);
    }
    std::size_t n = 0;
    while (n * n < vals.size()) ++n;
    if (n == 0 || n * n != vals.size()) throw std::invalid_argument("IntMatrix::parse_square: entry count is not a square");
    return IntMatrix(n, n, vals);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const BigInt& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  BigInt& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("IntMatrix: shape mismatch");
    IntMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k)
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a(i, k) * b(k, j);
    return out;
  }

  IntMatrix transpose() const {
    IntMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  FpMatrix reduce(Residue p) const {
    FpMatrix m(rows_, cols_, p);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(i, j) = mod((*this)(i, j), p);
    return m;
  }

  IntMatrix pow(std::uint64_t e) const {
    IntMatrix result = identity(rows_), base = *this;
    while (e > 0) {
      if (e & 1U) result = result * base;
      base = base * base;
      e >>= 1U;
    }
    return result;
  }

  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
      os << (i ? ";" : "");
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
    }
    os << ']';
    return os.str();
  }

  /// Row-major entries as comma separated text (inverse of parse_square).
  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < data_.size(); ++i) os << (i ? "," : "") << data_[i];
    return os.str();
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<BigInt> data_;
};

/// Gram matrix of the standard symplectic form, [[0, I], [-I, 0]].
inline IntMatrix symplectic_gram(int n) {
  IntMatrix j(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    j(i, n + i) = 1;
    j(n + i, i) = -1;
  }
  return j;
}

inline FpMatrix symplectic_gram(int n, Residue p) { return symplectic_gram(n).reduce(p); }

inline bool is_symplectic(const IntMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw std::invalid_argument("is_symplectic: matrix must be square of even dimension");
  IntMatrix j = symplectic_gram(static_cast<int>(m.rows() / 2));
  return m.transpose() * j * m == j;
}

inline bool is_symplectic(const FpMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw std::invalid_argument("is_symplectic: matrix must be square of even dimension");
  FpMatrix j = symplectic_gram(static_cast<int>(m.rows() / 2), m.modulus());
  return m.transpose() * j * m == j;
}

/// Symplectic form omega(x, y) = x^T J y on F_p^{2n}.
inline Residue symplectic_pairing(const std::vector<Residue>& x, const std::vector<Residue>& y, Residue p) {
  std::size_t n = x.size() / 2;
  Residue acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += mod(x[i], p) * mod(y[n + i], p) - mod(x[n + i], p) * mod(y[i], p);
  return mod(acc, p);
}

/// An element of Sp(2n, Z); construction validates A^T J A = J.
class SymplecticIntMatrix {
 public:
  explicit SymplecticIntMatrix(IntMatrix m) : m_(std::move(m)) {
    if (!is_symplectic(m_)) throw std::invalid_argument("SymplecticIntMatrix: matrix is not symplectic: " + m_.str());
  }
  const IntMatrix& matrix() const { return m_; }
  int n() const { return static_cast<int>(m_.rows() / 2); }
  std::size_t dim() const { return m_.rows(); }
  FpMatrix reduce(Residue p) const { return m_.reduce(p); }

 private:
  IntMatrix m_;
};

// ---------------------------------------------------------------------------
// polynomials
// ---------------------------------------------------------------------------

/// Integer polynomial, coefficients stored lowest degree first.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coeffs) : c_(std::move(coeffs)) { trim(); }
  IntPolynomial(std::initializer_list<long long> coeffs) : c_(coeffs.begin(), coeffs.end()) { trim(); }

  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  const std::vector<BigInt>& coeffs() const { return c_; }
  BigInt coeff(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : BigInt(0); }
  bool is_zero() const { return c_.empty(); }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }
  BigInt leading() const { return c_.empty() ? BigInt(0) : c_.back(); }

  bool is_palindromic() const {
    for (std::size_t k = 0; k < c_.size(); ++k)
      if (c_[k] != c_[c_.size() - 1 - k]) return false;
    return true;
  }

  BigInt eval(const BigInt& x) const {
    BigInt acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<BigInt> out(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return IntPolynomial(std::move(out));
  }

  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) {
    std::vector<BigInt> out(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] -= b.c_[i];
    return IntPolynomial(std::move(out));
  }

  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.c_ == b.c_; }

  /// Exact division by a divisor whose leading coefficient divides every step;
  /// returns {quotient, remainder} when the division stays integral, otherwise
  /// the remainder is reported non-zero.
  std::pair<IntPolynomial, IntPolynomial> divmod(const IntPolynomial& d) const {
    if (d.is_zero()) throw std::domain_error("IntPolynomial::divmod: division by zero");
    std::vector<BigInt> rem = c_;
    int dd = d.degree();
    std::vector<BigInt> quot(std::max(0, degree() - dd + 1), 0);
    for (int k = degree(); k >= dd; --k) {
      BigInt lead = rem[k];
      if (lead == 0) continue;
      if (lead % d.leading() != 0) return {IntPolynomial(quot), IntPolynomial(rem)};
      BigInt q = lead / d.leading();
      quot[k - dd] = q;
      for (int i = 0; i <= dd; ++i) rem[k - dd + i] -= q * d.c_[i];
    }
    return {IntPolynomial(std::move(quot)), IntPolynomial(std::move(rem))};
  }

  bool divisible_by(const IntPolynomial& d) const { return divmod(d).second.is_zero(); }

  std::string str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
      const BigInt& a = c_[k];
      if (a == 0) continue;
      BigInt mag = a < 0 ? BigInt(-a) : a;
      os << (a < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
      if (mag != 1 || k == 0) os << mag;
      if (k >= 1) os << "x";
      if (k >= 2) os << "^" << k;
      first = false;
    }
    return os.str();
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<BigInt> c_;
};

inline std::ostream& operator<<(std::ostream& os, const IntPolynomial& f) { return os << f.str(); }

/// Polynomial over F_p, lowest degree first, always trimmed.
class FpPolynomial {
 public:
  explicit FpPolynomial(Residue p) : p_(p) {}
  FpPolynomial(Residue p, std::vector<Residue> coeffs) : p_(p), c_(std::move(coeffs)) {
    for (auto& e : c_) e = mod(e, p_);
    trim();
  }
  FpPolynomial(const IntPolynomial& f, Residue p) : p_(p) {
    for (const auto& a : f.coeffs()) c_.push_back(mod(a, p));
    trim();
  }

  static FpPolynomial monomial(Residue p, int k, Residue a = 1) {
    std::vector<Residue> c(k + 1, 0);
    c[k] = a;
    return FpPolynomial(p, std::move(c));
  }

  Residue modulus() const { return p_; }
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Residue>& coeffs() const { return c_; }
  Residue coeff(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : 0; }
  Residue leading() const { return c_.empty() ? 0 : c_.back(); }

  Residue eval(Residue x) const {
    Residue acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = (acc * x + *it) % p_;
    return acc;
  }

  FpPolynomial monic() const {
    if (c_.empty()) return *this;
    Residue li = inv_mod(leading(), p_);
    std::vector<Residue> out = c_;
    for (auto& e : out) e = e * li % p_;
    return FpPolynomial(p_, std::move(out));
  }

  FpPolynomial derivative() const {
    std::vector<Residue> out;
    for (std::size_t k = 1; k < c_.size(); ++k) out.push_back(c_[k] * static_cast<Residue>(k) % p_);
    return FpPolynomial(p_, std::move(out));
  }

  friend FpPolynomial operator+(const FpPolynomial& a, const FpPolynomial& b) {
    std::vector<Residue> out(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
    return FpPolynomial(a.p_, std::move(out));
  }
  friend FpPolynomial operator-(const FpPolynomial& a, const FpPolynomial& b) {
    std::vector<Residue> out(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] -= b.c_[i];
    return FpPolynomial(a.p_, std::move(out));
  }
  friend FpPolynomial operator*(const FpPolynomial& a, const FpPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return FpPolynomial(a.p_);
    std::vector<Residue> out(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] = (out[i + j] + a.c_[i] * b.c_[j]) % a.p_;
    return FpPolynomial(a.p_, std::move(out));
  }
  friend bool operator==(const FpPolynomial& a, const FpPolynomial& b) { return a.p_ == b.p_ && a.c_ == b.c_; }

  std::pair<FpPolynomial, FpPolynomial> divmod(const FpPolynomial& d) const {
    if (d.is_zero()) throw std::domain_error("FpPolynomial::divmod: division by zero");
    std::vector<Residue> rem = c_;
    int dd = d.degree();
    Residue li = inv_mod(d.leading(), p_);
    std::vector<Residue> quot(std::max(0, degree() - dd + 1), 0);
    for (int k = degree(); k >= dd; --k) {
      Residue q = rem[k] * li % p_;
      if (q == 0) continue;
      quot[k - dd] = q;
      for (int i = 0; i <= dd; ++i) rem[k - dd + i] = mod(rem[k - dd + i] - q * d.c_[i], p_);
    }
    return {FpPolynomial(p_, std::move(quot)), FpPolynomial(p_, std::move(rem))};
  }

  FpPolynomial operator%(const FpPolynomial& d) const { return divmod(d).second; }
  FpPolynomial operator/(const FpPolynomial& d) const { return divmod(d).first; }

  /// Monic gcd.
  friend FpPolynomial gcd(FpPolynomial a, FpPolynomial b) {
    while (!b.is_zero()) {
      FpPolynomial r = a % b;
      a = std::move(b);
      b = std::move(r);
    }
    return a.monic();
  }

  /// x^deg f(1/x), made monic; roots are the inverses of the roots of f (f(0) != 0).
  FpPolynomial reciprocal() const {
    std::vector<Residue> out(c_.rbegin(), c_.rend());
    return FpPolynomial(p_, std::move(out)).monic();
  }

  /// this^e mod m
  FpPolynomial powmod(BigInt e, const FpPolynomial& m) const {
    FpPolynomial result(p_, {1});
    FpPolynomial base = *this % m;
    result = result % m;
    while (e > 0) {
      if ((e & 1) != 0) result = (result * base) % m;
      base = (base * base) % m;
      e >>= 1;
    }
    return result;
  }

  std::string str() const {
    std::vector<BigInt> big(c_.begin(), c_.end());
    return IntPolynomial(big).str() + " (mod " + std::to_string(p_) + ")";
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  Residue p_;
  std::vector<Residue> c_;
};

// ---------------------------------------------------------------------------
// characteristic polynomials (Berkowitz, division free)
// ---------------------------------------------------------------------------

namespace detail {

// Coefficients of det(xI - M), highest degree first.
inline std::vector<BigInt> berkowitz(const IntMatrix& m) {
  std::size_t n = m.rows();
  if (n == 0) return {1};
  if (n == 1) return {1, -m(0, 0)};
  IntMatrix sub(n - 1, n - 1), col(n - 1, 1), row(1, n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    col(i - 1, 0) = m(i, 0);
    row(0, i - 1) = m(0, i);
    for (std::size_t j = 1; j < n; ++j) sub(i - 1, j - 1) = m(i, j);
  }
  std::vector<BigInt> items{1, -m(0, 0)};
  IntMatrix power = col;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    items.push_back(-(row * power)(0, 0));
    power = sub * power;
  }
  std::vector<BigInt> inner = berkowitz(sub);
  // (n+1) x n lower-triangular Toeplitz matrix times inner
  std::vector<BigInt> out(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < n && j <= i; ++j) out[i] += items[i - j] * inner[j];
  return out;
}

}  // namespace detail

inline IntPolynomial char_poly(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("char_poly: matrix must be square");
  std::vector<BigInt> high_first = detail::berkowitz(m);
  std::reverse(high_first.begin(), high_first.end());
  return IntPolynomial(std::move(high_first));
}

inline IntPolynomial char_poly(const SymplecticIntMatrix& a) { return char_poly(a.matrix()); }

inline FpPolynomial char_poly(const FpMatrix& m) {
  IntMatrix lift(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) lift(i, j) = m(i, j);
  return FpPolynomial(char_poly(lift), m.modulus());
}

/// True when the minimal polynomial equals the characteristic polynomial,
/// i.e. I, M, ..., M^{d-1} are linearly independent over F_p.
inline bool is_regular(const FpMatrix& m) {
  std::size_t d = m.rows();
  FpMatrix stack(d, d * d, m.modulus());
  FpMatrix power = FpMatrix::identity(d, m.modulus());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t e = 0; e < d * d; ++e) stack(k, e) = power.entries()[e];
    power = power * m;
  }
  return stack.rank() == d;
}

// ---------------------------------------------------------------------------
// irreducibility
// ---------------------------------------------------------------------------

struct FactorShape {
  int degree = 0;
  int multiplicity = 0;
  friend bool operator==(const FactorShape&, const FactorShape&) = default;
};

struct IrreducibilityReport {
  bool irreducible = false;
  std::string detail;               // witness factor or reason
  std::vector<FactorShape> factors;  // mod-p factor shapes (empty over Q)
};

namespace detail {

inline std::vector<BigInt> divisors(BigInt v) {
  if (v < 0) v = -v;
  std::vector<BigInt> out;
  if (v == 0) return out;
  for (BigInt d = 1; d * d <= v; ++d) {
    if (v % d == 0) {
      out.push_back(d);
      if (d * d != v) out.push_back(v / d);
    }
  }
  return out;
}

// Cauchy bound on the absolute value of complex roots.
inline BigInt root_bound(const IntPolynomial& f) {
  BigInt mx = 0;
  for (int k = 0; k < f.degree(); ++k) {
    BigInt a = abs(f.coeff(k));
    if (a > mx) mx = a;
  }
  BigInt lead = abs(f.leading());
  return 1 + (mx + lead - 1) / lead;
}

// Squarefree decomposition over F_p: pairs (squarefree factor, multiplicity).
inline std::vector<std::pair<FpPolynomial, int>> squarefree_decomposition(const FpPolynomial& f0) {
  std::vector<std::pair<FpPolynomial, int>> out;
  Residue p = f0.modulus();
  FpPolynomial f = f0.monic();
  std::function<void(const FpPolynomial&, int)> rec = [&](const FpPolynomial& g, int scale) {
    if (g.degree() <= 0) return;
    FpPolynomial dg = g.derivative();
    if (dg.is_zero()) {
      // g = h(x^p) = h(x)^p over F_p
      std::vector<Residue> h;
      for (int k = 0; k <= g.degree(); k += static_cast<int>(p)) h.push_back(g.coeff(k));
      rec(FpPolynomial(p, h), scale * static_cast<int>(p));
      return;
    }
    FpPolynomial c = gcd(g, dg);
    FpPolynomial w = g / c;
    int i = 1;
    while (w.degree() > 0) {
      FpPolynomial y = gcd(w, c);
      FpPolynomial fac = w / y;
      if (fac.degree() > 0) out.emplace_back(fac.monic(), i * scale);
      w = y;
      c = c / y;
      ++i;
    }
    if (c.degree() > 0) {
      std::vector<Residue> h;
      for (int k = 0; k <= c.degree(); k += static_cast<int>(p)) h.push_back(c.coeff(k));
      rec(FpPolynomial(p, h), scale * static_cast<int>(p));
    }
  };
  rec(f, 1);
  return out;
}

}  // namespace detail

/// Irreducible-factor shapes (degree, multiplicity) of f mod p, sorted.
inline std::vector<FactorShape> factor_shapes_mod_p(const IntPolynomial& f, Residue p) {
  if (f.degree() > 8) throw std::invalid_argument("factor_shapes_mod_p: degree > 8 unsupported");
  FpPolynomial g(f, p);
  if (g.degree() < 0) throw std::invalid_argument("factor_shapes_mod_p: zero polynomial mod p");
  std::vector<FactorShape> shapes;
  for (const auto& [part, mult] : detail::squarefree_decomposition(g)) {
    // distinct-degree factorization of the squarefree part
    FpPolynomial rest = part;
    FpPolynomial x = FpPolynomial::monomial(p, 1);
    FpPolynomial xq = x;
    for (int d = 1; 2 * d <= rest.degree(); ++d) {
      xq = xq.powmod(BigInt(p), rest);
      FpPolynomial h = gcd(rest, xq - x);
      if (h.degree() > 0) {
        for (int k = 0; k < h.degree() / d; ++k) shapes.push_back({d, mult});
        rest = rest / h;
        xq = xq % rest;
      }
    }
    if (rest.degree() > 0) shapes.push_back({rest.degree(), mult});
  }
  std::sort(shapes.begin(), shapes.end(),
            [](const FactorShape& a, const FactorShape& b) { return std::tie(a.degree, a.multiplicity) < std::tie(b.degree, b.multiplicity); });
  return shapes;
}

/// Monic irreducible factors, with repetition, of a polynomial of degree <= 5
/// over F_p: linear factors by root enumeration, then trial division by monic
/// quadratics; what is left has no factor of degree <= 2 and is irreducible.
inline std::vector<FpPolynomial> factor_small_mod_p(FpPolynomial f) {
  if (f.degree() > 5) throw std::invalid_argument("factor_small_mod_p: degree > 5 unsupported");
  const Residue p = f.modulus();
  f = f.monic();
  std::vector<FpPolynomial> out;
  for (Residue r = 0; r < p && f.degree() > 0; ++r) {
    FpPolynomial lin(p, {-r, 1});
    while (f.degree() > 0 && f.eval(r) == 0) {
      out.push_back(lin);
      f = f / lin;
    }
  }
  for (Residue c = 0; c < p && f.degree() >= 4; ++c)
    for (Residue b = 0; b < p && f.degree() >= 4; ++b) {
      FpPolynomial q(p, {c, b, 1});
      while (f.degree() >= 4 && (f % q).is_zero()) {
        out.push_back(q);
        f = f / q;
      }
    }
  if (f.degree() > 0) out.push_back(f);
  return out;
}

/// Irreducibility over Q (degree <= 4) or over F_p (degree <= 8).
inline IrreducibilityReport is_irreducible(const IntPolynomial& f, std::optional<Residue> modulus = std::nullopt) {
  if (f.is_zero()) throw std::invalid_argument("is_irreducible: zero polynomial");
  if (f.degree() > 8) throw std::invalid_argument("is_irreducible: degree > 8 unsupported");
  IrreducibilityReport rep;
  if (modulus) {
    rep.factors = factor_shapes_mod_p(f, *modulus);
    rep.irreducible = rep.factors.size() == 1 && rep.factors[0].multiplicity == 1;
    std::ostringstream os;
    for (const auto& s : rep.factors) os << "(deg " << s.degree << ")^" << s.multiplicity << ' ';
    rep.detail = os.str();
    return rep;
  }
  int deg = f.degree();
  if (deg > 4) throw std::invalid_argument("is_irreducible: degree > 4 over Q unsupported");
  if (deg <= 0) {
    rep.irreducible = false;
    rep.detail = "constant";
    return rep;
  }
  if (deg == 1) {
    rep.irreducible = true;
    rep.detail = "linear";
    return rep;
  }
  // rational roots r = s / t with s | a_0, t | a_deg
  if (f.coeff(0) == 0) {
    rep.detail = "root 0";
    return rep;
  }
  for (const BigInt& s : detail::divisors(f.coeff(0)))
    for (const BigInt& t : detail::divisors(f.leading()))
      for (int sign : {1, -1}) {
        IntPolynomial lin({BigInt(-sign * s), t});
        if (f.divisible_by(lin)) {
          std::ostringstream os;
          os << "rational root " << (sign < 0 ? "-" : "") << s << "/" << t;
          rep.detail = os.str();
          return rep;
        }
      }
  if (deg <= 3) {
    rep.irreducible = true;
    rep.detail = "no rational roots";
    return rep;
  }
  // quartic: search quadratic factors a x^2 + b x + c
  BigInt bound = detail::root_bound(f);
  for (const BigInt& a : detail::divisors(f.leading()))
    for (const BigInt& cabs : detail::divisors(f.coeff(0)))
      for (int csign : {1, -1}) {
        BigInt c = csign * cabs;
        BigInt bmax = 2 * a * bound;
        for (BigInt b = -bmax; b <= bmax; ++b) {
          IntPolynomial quad({c, b, a});
          if (f.divisible_by(quad)) {
            rep.detail = "quadratic factor " + quad.str();
            return rep;
          }
        }
      }
  rep.irreducible = true;
  rep.detail = "no rational roots and no quadratic factor";
  return rep;
}

}  // namespace torusq
