#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace orthokit {

using Oid = std::uint32_t;

/// Sorted, duplicate-free list of outcome ids.
using OutcomeSet = std::vector<Oid>;
using Event = OutcomeSet;

// ---------------------------------------------------------------------------
// Errors

enum class ErrorCode {
  RedundantTests,
  EmptyTest,
  UnknownLabel,
  LabelCollision,
  EnumerationCapExceeded,
  NumericKindMismatch,
  PositivityViolation,
  NotLocallyInjective,
  ImageNotEvent,
  ImagesNotPerspective,
  PullbackNotState,
  DomainMismatch,
  HypothesisUnmet,
  NotAlgebraic,
  LawViolation,
  NotCoherence,
  NotAMorphism,
  ZeroMarginal,
  NotSequential,
  NotGAlgebra,
  NotOrthonormal,
  NotAState,
  DepthCapExceeded,
  UnknownName,
  ParseError,
  MissingStructure,
  NotAnEvent,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::RedundantTests: return "RedundantTests";
    case ErrorCode::EmptyTest: return "EmptyTest";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::LabelCollision: return "LabelCollision";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::NumericKindMismatch: return "NumericKindMismatch";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::NotLocallyInjective: return "NotLocallyInjective";
    case ErrorCode::ImageNotEvent: return "ImageNotEvent";
    case ErrorCode::ImagesNotPerspective: return "ImagesNotPerspective";
    case ErrorCode::PullbackNotState: return "PullbackNotState";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::HypothesisUnmet: return "HypothesisUnmet";
    case ErrorCode::NotAlgebraic: return "NotAlgebraic";
    case ErrorCode::LawViolation: return "LawViolation";
    case ErrorCode::NotCoherence: return "NotCoherence";
    case ErrorCode::NotAMorphism: return "NotAMorphism";
    case ErrorCode::ZeroMarginal: return "ZeroMarginal";
    case ErrorCode::NotSequential: return "NotSequential";
    case ErrorCode::NotGAlgebra: return "NotGAlgebra";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::NotAState: return "NotAState";
    case ErrorCode::DepthCapExceeded: return "DepthCapExceeded";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingStructure: return "MissingStructure";
    case ErrorCode::NotAnEvent: return "NotAnEvent";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Outcome of a pointwise law check.
struct LawReport {
  std::string law;
  bool holds = true;
  std::size_t points = 0;
  std::string witness;
};

inline bool all_hold(const std::vector<LawReport>& r) {
  return std::all_of(r.begin(), r.end(), [](const LawReport& l) { return l.holds; });
}

// ---------------------------------------------------------------------------
// Enumeration caps

inline constexpr std::size_t kDefaultCap = 2'000'000;

/// Global enumeration cap; ORTHOKIT_CAP overrides the default when set.
inline std::size_t& global_cap_slot() {
  static std::size_t cap = [] {
    if (const char* env = std::getenv("ORTHOKIT_CAP")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultCap;
  }();
  return cap;
}

inline std::size_t default_cap() { return global_cap_slot(); }
inline void set_default_cap(std::size_t cap) { global_cap_slot() = cap; }

inline void check_cap(std::size_t count, std::size_t cap, const char* what) {
  if (count > cap)
    throw Error(ErrorCode::EnumerationCapExceeded,
                std::string(what) + " exceeds cap " + std::to_string(cap));
}

// ---------------------------------------------------------------------------
// Sorted-set helpers

inline OutcomeSet normalized(OutcomeSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline bool contains(const OutcomeSet& s, Oid x) {
  return std::binary_search(s.begin(), s.end(), x);
}

inline bool is_subset(const OutcomeSet& a, const OutcomeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline OutcomeSet set_union(const OutcomeSet& a, const OutcomeSet& b) {
  OutcomeSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline OutcomeSet set_intersection(const OutcomeSet& a, const OutcomeSet& b) {
  OutcomeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline OutcomeSet set_difference(const OutcomeSet& a, const OutcomeSet& b) {
  OutcomeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool disjoint(const OutcomeSet& a, const OutcomeSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else return false;
  }
  return true;
}

struct VectorHash {
  template <class T>
  std::size_t operator()(const std::vector<T>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL ^ v.size();
    for (const auto& x : v) {
      h ^= std::hash<T>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// ---------------------------------------------------------------------------
// Bits: dynamic bitset with two inline words.

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t nbits) : words_((nbits + 63) / 64, 0) {}
  Bits(std::size_t nbits, const OutcomeSet& members) : Bits(nbits) {
    for (Oid x : members) set(x);
  }

  std::size_t word_count() const { return words_.size(); }
  void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }

  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  bool none() const { return !any(); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

  Bits& operator&=(const Bits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  Bits& minus(const Bits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  friend Bits operator&(Bits a, const Bits& b) { return a &= b; }
  friend Bits operator|(Bits a, const Bits& b) { return a |= b; }
  friend Bits operator-(Bits a, const Bits& b) { return a.minus(b); }

  bool subset_of(const Bits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }
  bool intersects(const Bits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  /// Lowest set index, or npos.
  std::size_t first() const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i]) return i * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[i]));
    return npos;
  }

  OutcomeSet members() const {
    OutcomeSet out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        out.push_back(static_cast<Oid>(i * 64 + static_cast<std::size_t>(__builtin_ctzll(w))));
        w &= w - 1;
      }
    }
    return out;
  }

  friend bool operator==(const Bits& a, const Bits& b) { return a.words_ == b.words_; }
  friend bool operator!=(const Bits& a, const Bits& b) { return !(a == b); }

  std::size_t hash() const noexcept {
    std::size_t h = 0x84222325cbf29ce4ULL;
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  boost::container::small_vector<std::uint64_t, 2> words_;
};

struct BitsHash {
  std::size_t operator()(const Bits& b) const noexcept { return b.hash(); }
};

}  // namespace orthokit
