// Naturals extended with Infinity, saturating.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

namespace skit {

struct MeasureValue {
  bool inf = false;
  uint64_t n = 0;

  static MeasureValue infinity() { return {true, 0}; }
  static MeasureValue of(uint64_t v) { return {false, v}; }

  bool operator==(const MeasureValue& o) const { return inf == o.inf && (inf || n == o.n); }
  bool operator<(const MeasureValue& o) const {
    if (inf) return false;
    return o.inf || n < o.n;
  }
  bool operator<=(const MeasureValue& o) const { return !(o < *this); }

  MeasureValue operator+(const MeasureValue& o) const {
    if (inf || o.inf) return infinity();
    return of(n + o.n);
  }
  // max(0, this - k); Infinity minus a natural stays Infinity.
  MeasureValue monus(uint64_t k) const {
    if (inf) return *this;
    return of(n > k ? n - k : 0);
  }
  std::string str() const { return inf ? "inf" : std::to_string(n); }
};

inline MeasureValue min(const MeasureValue& a, const MeasureValue& b) { return a < b ? a : b; }
inline MeasureValue max(const MeasureValue& a, const MeasureValue& b) { return a < b ? b : a; }

}  // namespace skit
