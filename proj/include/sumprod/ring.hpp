#pragma once

// Exact arithmetic in Z/p^kZ for odd primes p and small exponents k.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "sumprod/errors.hpp"

namespace sumprod {

using i64 = std::int64_t;
using u64 = std::uint64_t;

/// Canonical representative of a in [0, m).
constexpr i64 mod_reduce(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

constexpr i64 mul_mod(i64 a, i64 b, i64 m) {
  return static_cast<i64>((static_cast<__int128>(a) * b) % m);
}

constexpr i64 pow_mod(i64 base, u64 exp, i64 m) {
  i64 result = 1 % m;
  base = mod_reduce(base, m);
  while (exp > 0) {
    if (exp & 1U) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

/// Inverse of a modulo m by the extended Euclidean algorithm, or nullopt when
/// gcd(a, m) != 1.
constexpr std::optional<i64> inverse_mod(i64 a, i64 m) {
  i64 old_r = mod_reduce(a, m), r = m;
  i64 old_s = 1, s = 0;
  while (r != 0) {
    const i64 quotient = old_r / r;
    i64 tmp = old_r - quotient * r;
    old_r = r;
    r = tmp;
    tmp = old_s - quotient * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) return std::nullopt;
  return mod_reduce(old_s, m);
}

constexpr bool is_prime(i64 n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (i64 d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

/// The ring Z/qZ with q = p^k, p an odd prime.
class Modulus {
 public:
  static constexpr i64 kMaxModulus = i64{1} << 31;

  Modulus(i64 p, int k) : p_(p), k_(k), q_(1) {
    require(p >= 3 && is_prime(p), ErrorKind::ParamOutOfRange,
            "modulus base must be an odd prime, got " + std::to_string(p));
    require(k >= 1, ErrorKind::ParamOutOfRange, "exponent must be >= 1");
    for (int i = 0; i < k; ++i) {
      q_ *= p;
      require(q_ <= kMaxModulus, ErrorKind::ParamOutOfRange,
              "p^k exceeds 2^31: p=" + std::to_string(p) + ", k=" + std::to_string(k));
    }
  }

  i64 p() const noexcept { return p_; }
  int k() const noexcept { return k_; }
  i64 q() const noexcept { return q_; }

  /// zq-geometry needs -1 to be a non-residue mod p.
  void require_3_mod_4() const {
    require(p_ % 4 == 3, ErrorKind::BadModulus,
            "p must be 3 mod 4, got p=" + std::to_string(p_));
  }

  i64 reduce(i64 a) const noexcept { return mod_reduce(a, q_); }
  bool is_unit(i64 a) const noexcept { return mod_reduce(a, p_) != 0; }
  i64 add(i64 a, i64 b) const noexcept { return reduce(a + b); }
  i64 sub(i64 a, i64 b) const noexcept { return reduce(a - b); }
  i64 mul(i64 a, i64 b) const noexcept { return mul_mod(a, b, q_); }
  i64 neg(i64 a) const noexcept { return reduce(-a); }

  i64 inv(i64 a) const {
    const auto r = inverse_mod(a, q_);
    if (!r) fail(ErrorKind::NonUnit, std::to_string(reduce(a)) + " is not a unit mod " + std::to_string(q_));
    return *r;
  }

  /// p-adic valuation of a mod q, with v(0) = k.
  int valuation(i64 a) const noexcept {
    a = reduce(a);
    if (a == 0) return k_;
    int v = 0;
    while (a % p_ == 0) {
      a /= p_;
      ++v;
    }
    return v;
  }

  friend bool operator==(const Modulus& a, const Modulus& b) noexcept {
    return a.p_ == b.p_ && a.k_ == b.k_;
  }

 private:
  i64 p_;
  int k_;
  i64 q_;
};

/// An element of Z/qZ kept in canonical form [0, q).
class RingElem {
 public:
  RingElem(i64 value, const Modulus& modulus) : value_(modulus.reduce(value)), modulus_(modulus) {}

  i64 value() const noexcept { return value_; }
  const Modulus& modulus() const noexcept { return modulus_; }

  friend RingElem operator+(const RingElem& a, const RingElem& b) {
    check_same(a, b);
    return {a.value_ + b.value_, a.modulus_};
  }
  friend RingElem operator-(const RingElem& a, const RingElem& b) {
    check_same(a, b);
    return {a.value_ - b.value_, a.modulus_};
  }
  friend RingElem operator*(const RingElem& a, const RingElem& b) {
    check_same(a, b);
    return {a.modulus_.mul(a.value_, b.value_), a.modulus_};
  }
  RingElem operator-() const { return {-value_, modulus_}; }

  friend bool operator==(const RingElem& a, const RingElem& b) {
    check_same(a, b);
    return a.value_ == b.value_;
  }

 private:
  static void check_same(const RingElem& a, const RingElem& b) {
    require(a.modulus_ == b.modulus_, ErrorKind::UniverseMismatch,
            "elements of Z/" + std::to_string(a.modulus_.q()) + " and Z/" +
                std::to_string(b.modulus_.q()) + " cannot be combined");
  }

  i64 value_;
  Modulus modulus_;
};

inline bool is_unit(const RingElem& x) { return x.modulus().is_unit(x.value()); }

inline RingElem inverse(const RingElem& x) { return {x.modulus().inv(x.value()), x.modulus()}; }

/// Legendre symbol (d|p) by Euler's criterion.
inline int legendre(i64 d, i64 p) {
  const i64 r = pow_mod(mod_reduce(d, p), static_cast<u64>((p - 1) / 2), p);
  if (r == 0) return 0;
  return r == 1 ? 1 : -1;
}

/// Number of square roots of d in Z/p^3Z, from the six-case closed form.
inline u64 sqrt_count(const RingElem& d) {
  const Modulus& m = d.modulus();
  require(m.k() == 3, ErrorKind::ParamOutOfRange, "closed form needs k = 3");
  const i64 p = m.p();
  const i64 v = d.value();
  if (v == 0) return static_cast<u64>(p);
  switch (m.valuation(v)) {
    case 0: return legendre(v, p) == 1 ? 2 : 0;
    case 1: return 0;
    default: return legendre(v / (p * p), p) == 1 ? static_cast<u64>(2 * p) : 0;
  }
}

/// Exhaustive count of x in [0, q) with x^2 = d.
inline u64 sqrt_count_oracle(const RingElem& d) {
  const Modulus& m = d.modulus();
  u64 count = 0;
  for (i64 x = 0; x < m.q(); ++x) {
    if (m.mul(x, x) == d.value()) ++count;
  }
  return count;
}

}  // namespace sumprod
