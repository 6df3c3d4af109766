#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "twoamc/error.hpp"

namespace twoamc {

enum class SemiringId { Probability, MaxTimes, MaxPlus, ExpectedUtility, NatPair, MapArgmax, MeuArgmax };

enum class TransformId { Identity, ProbToMapArgmax, EuProject, NatPairRatio };

using BigNat = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Numeric tolerance

inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline bool approx_equal(double a, double b, double rel = kRelTol, double abs_floor = kAbsTol) {
  if (a == b) return true;
  if (std::isnan(a) || std::isnan(b) || std::isinf(a) || std::isinf(b)) return false;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= std::max(abs_floor, rel * scale);
}

inline std::string format_real(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Reals extended with an explicit -infinity (max-plus carrier).

class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal neg_inf() {
    ExtReal r;
    r.neg_inf_ = true;
    return r;
  }

  constexpr bool is_neg_inf() const { return neg_inf_; }
  // Only meaningful when !is_neg_inf().
  constexpr double value() const { return value_; }
  double as_double() const { return neg_inf_ ? -std::numeric_limits<double>::infinity() : value_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return neg_inf();
    return ExtReal(a.value_ + b.value_);
  }

  friend bool operator<(ExtReal a, ExtReal b) {
    if (a.neg_inf_) return !b.neg_inf_;
    if (b.neg_inf_) return false;
    return a.value_ < b.value_;
  }

  friend bool operator==(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
    return a.value_ == b.value_;
  }

  friend bool approx_equal(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
    return approx_equal(a.value_, b.value_);
  }

 private:
  double value_ = 0.0;
  bool neg_inf_ = false;
};

inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

inline std::string format_real(ExtReal x) { return x.is_neg_inf() ? "-inf" : format_real(x.value()); }

// ---------------------------------------------------------------------------
// Literal sets (argmax witnesses). Kept sorted by (variable, sign) with the
// negative literal first; that is also the fixed total order used to break
// ties between equal scores.

using LitSet = std::vector<int>;

inline bool literal_less(int a, int b) {
  const int va = std::abs(a), vb = std::abs(b);
  if (va != vb) return va < vb;
  return a < b;
}

inline bool litset_less(const LitSet& a, const LitSet& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), literal_less);
}

inline LitSet litset_union(const LitSet& a, const LitSet& b) {
  LitSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), literal_less);
  return out;
}

inline LitSet make_litset(std::vector<int> lits) {
  std::sort(lits.begin(), lits.end(), literal_less);
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  return lits;
}

// ---------------------------------------------------------------------------
// Value carriers

struct EuPair {
  double p = 0.0;
  double eu = 0.0;
  friend bool operator==(const EuPair&, const EuPair&) = default;
};

struct NatPair {
  BigNat n1 = 0;
  BigNat n2 = 0;
  friend bool operator==(const NatPair&, const NatPair&) = default;
};

template <class Score>
struct Scored {
  Score score{};
  LitSet witness;
  friend bool operator==(const Scored&, const Scored&) = default;
};

using MapValue = Scored<double>;
using MeuValue = Scored<ExtReal>;

// Probability and MaxTimes share the plain double carrier; which operations
// apply is decided by the SemiringId passed alongside.
using Value = std::variant<double, ExtReal, EuPair, NatPair, MapValue, MeuValue>;

// ---------------------------------------------------------------------------
// Static semirings. Each models the Semiring concept below; the runtime API
// dispatches on SemiringId to one of these.

template <class S>
concept Semiring = requires(const typename S::value_type& a, const typename S::value_type& b) {
  { S::id } -> std::convertible_to<SemiringId>;
  { S::zero() } -> std::same_as<typename S::value_type>;
  { S::one() } -> std::same_as<typename S::value_type>;
  { S::add(a, b) } -> std::same_as<typename S::value_type>;
  { S::mul(a, b) } -> std::same_as<typename S::value_type>;
  { S::equal(a, b) } -> std::same_as<bool>;
};

namespace semirings {

struct Probability {
  using value_type = double;
  static constexpr SemiringId id = SemiringId::Probability;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double add(double a, double b) { return a + b; }
  static double mul(double a, double b) { return a * b; }
  static bool equal(double a, double b) { return approx_equal(a, b); }
};

struct MaxTimes {
  using value_type = double;
  static constexpr SemiringId id = SemiringId::MaxTimes;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double add(double a, double b) { return std::max(a, b); }
  static double mul(double a, double b) { return a * b; }
  static bool equal(double a, double b) { return approx_equal(a, b); }
};

struct MaxPlus {
  using value_type = ExtReal;
  static constexpr SemiringId id = SemiringId::MaxPlus;
  static ExtReal zero() { return ExtReal::neg_inf(); }
  static ExtReal one() { return ExtReal(0.0); }
  static ExtReal add(ExtReal a, ExtReal b) { return max(a, b); }
  static ExtReal mul(ExtReal a, ExtReal b) { return a + b; }
  static bool equal(ExtReal a, ExtReal b) { return approx_equal(a, b); }
};

struct ExpectedUtility {
  using value_type = EuPair;
  static constexpr SemiringId id = SemiringId::ExpectedUtility;
  static EuPair zero() { return {0.0, 0.0}; }
  static EuPair one() { return {1.0, 0.0}; }
  static EuPair add(const EuPair& a, const EuPair& b) { return {a.p + b.p, a.eu + b.eu}; }
  static EuPair mul(const EuPair& a, const EuPair& b) { return {a.p * b.p, b.p * a.eu + a.p * b.eu}; }
  static bool equal(const EuPair& a, const EuPair& b) { return approx_equal(a.p, b.p) && approx_equal(a.eu, b.eu); }
};

struct NatPairs {
  using value_type = NatPair;
  static constexpr SemiringId id = SemiringId::NatPair;
  static NatPair zero() { return {0, 0}; }
  static NatPair one() { return {1, 1}; }
  static NatPair add(const NatPair& a, const NatPair& b) { return {a.n1 + b.n1, a.n2 + b.n2}; }
  static NatPair mul(const NatPair& a, const NatPair& b) { return {a.n1 * b.n1, a.n2 * b.n2}; }
  static bool equal(const NatPair& a, const NatPair& b) { return a == b; }
};

// Max-times (MapArgmax) or max-plus (MeuArgmax) paired with the literal set
// that produced the maximum. Equal scores keep the smaller witness. Every
// value scored at the base zero is the zero element; its witness is dropped.
template <class Base, SemiringId Id>
struct Argmax {
  using score_type = typename Base::value_type;
  using value_type = Scored<score_type>;
  static constexpr SemiringId id = Id;
  static value_type zero() { return {Base::zero(), {}}; }
  static value_type one() { return {Base::one(), {}}; }
  static bool null(const value_type& v) { return !(Base::zero() < v.score); }
  static value_type add(const value_type& a, const value_type& b) {
    if (null(a) && null(b)) return zero();
    if (a.score < b.score) return b;
    if (b.score < a.score) return a;
    return litset_less(b.witness, a.witness) ? b : a;
  }
  static value_type mul(const value_type& a, const value_type& b) {
    value_type r{Base::mul(a.score, b.score), litset_union(a.witness, b.witness)};
    return null(r) ? zero() : r;
  }
  static bool equal(const value_type& a, const value_type& b) {
    if (null(a) || null(b)) return null(a) && null(b);
    return Base::equal(a.score, b.score) && a.witness == b.witness;
  }
};

using MapArgmax = Argmax<MaxTimes, SemiringId::MapArgmax>;
using MeuArgmax = Argmax<MaxPlus, SemiringId::MeuArgmax>;

static_assert(Semiring<Probability> && Semiring<MaxTimes> && Semiring<MaxPlus>);
static_assert(Semiring<ExpectedUtility> && Semiring<NatPairs>);
static_assert(Semiring<MapArgmax> && Semiring<MeuArgmax>);

}  // namespace semirings

// Calls f with a default-constructed tag of the static semiring for id.
template <class F>
decltype(auto) visit_semiring(SemiringId id, F&& f) {
  switch (id) {
    case SemiringId::Probability: return f(semirings::Probability{});
    case SemiringId::MaxTimes: return f(semirings::MaxTimes{});
    case SemiringId::MaxPlus: return f(semirings::MaxPlus{});
    case SemiringId::ExpectedUtility: return f(semirings::ExpectedUtility{});
    case SemiringId::NatPair: return f(semirings::NatPairs{});
    case SemiringId::MapArgmax: return f(semirings::MapArgmax{});
    case SemiringId::MeuArgmax: return f(semirings::MeuArgmax{});
  }
  throw InvalidValue("unknown semiring id");
}

// ---------------------------------------------------------------------------
// Tokens

inline std::string_view to_token(SemiringId id) {
  switch (id) {
    case SemiringId::Probability: return "probability";
    case SemiringId::MaxTimes: return "maxtimes";
    case SemiringId::MaxPlus: return "maxplus";
    case SemiringId::ExpectedUtility: return "eu";
    case SemiringId::NatPair: return "natpair";
    case SemiringId::MapArgmax: return "mapargmax";
    case SemiringId::MeuArgmax: return "meuargmax";
  }
  return "?";
}

inline std::string_view to_token(TransformId id) {
  switch (id) {
    case TransformId::Identity: return "identity";
    case TransformId::ProbToMapArgmax: return "prob2map";
    case TransformId::EuProject: return "euproject";
    case TransformId::NatPairRatio: return "ratio";
  }
  return "?";
}

inline std::optional<SemiringId> semiring_from_token(std::string_view tok) {
  for (auto id : {SemiringId::Probability, SemiringId::MaxTimes, SemiringId::MaxPlus, SemiringId::ExpectedUtility,
                  SemiringId::NatPair, SemiringId::MapArgmax, SemiringId::MeuArgmax}) {
    if (to_token(id) == tok) return id;
  }
  return std::nullopt;
}

inline std::optional<TransformId> transform_from_token(std::string_view tok) {
  for (auto id : {TransformId::Identity, TransformId::ProbToMapArgmax, TransformId::EuProject,
                  TransformId::NatPairRatio}) {
    if (to_token(id) == tok) return id;
  }
  return std::nullopt;
}

// Number of numeric fields a label takes in the labeled-CNF format.
inline int label_arity(SemiringId id) {
  switch (id) {
    case SemiringId::ExpectedUtility:
    case SemiringId::NatPair: return 2;
    default: return 1;
  }
}

// ---------------------------------------------------------------------------
// Runtime operations

namespace detail {

template <class S>
const typename S::value_type& expect(const Value& v) {
  if (const auto* p = std::get_if<typename S::value_type>(&v)) return *p;
  throw InvalidValue("value does not belong to semiring '" + std::string(to_token(S::id)) + "'");
}

}  // namespace detail

inline Value zero(SemiringId sr) {
  return visit_semiring(sr, [](auto s) -> Value { return decltype(s)::zero(); });
}

inline Value one(SemiringId sr) {
  return visit_semiring(sr, [](auto s) -> Value { return decltype(s)::one(); });
}

inline Value add(SemiringId sr, const Value& a, const Value& b) {
  return visit_semiring(sr, [&](auto s) -> Value {
    using S = decltype(s);
    return S::add(detail::expect<S>(a), detail::expect<S>(b));
  });
}

inline Value mul(SemiringId sr, const Value& a, const Value& b) {
  return visit_semiring(sr, [&](auto s) -> Value {
    using S = decltype(s);
    return S::mul(detail::expect<S>(a), detail::expect<S>(b));
  });
}

inline bool equal(SemiringId sr, const Value& a, const Value& b) {
  return visit_semiring(sr, [&](auto s) {
    using S = decltype(s);
    return S::equal(detail::expect<S>(a), detail::expect<S>(b));
  });
}

inline bool belongs_to(SemiringId sr, const Value& v) {
  return visit_semiring(sr, [&](auto s) { return std::holds_alternative<typename decltype(s)::value_type>(v); });
}

// Range check of a value against its semiring's carrier set.
inline void validate(SemiringId sr, const Value& v) {
  auto fail = [&](const char* why) {
    throw InvalidValue(std::string(why) + " for semiring '" + std::string(to_token(sr)) + "'");
  };
  if (!belongs_to(sr, v)) fail("value of wrong kind");
  auto nonneg_real = [](double x) { return std::isfinite(x) && x >= 0.0; };
  switch (sr) {
    case SemiringId::Probability: {
      const double p = std::get<double>(v);
      if (!nonneg_real(p) || p > 1.0 + kRelTol) fail("probability outside [0,1]");
      break;
    }
    case SemiringId::MaxTimes:
      if (!nonneg_real(std::get<double>(v))) fail("negative or non-finite value");
      break;
    case SemiringId::MaxPlus: {
      const auto x = std::get<ExtReal>(v);
      if (!x.is_neg_inf() && !std::isfinite(x.value())) fail("non-finite value");
      break;
    }
    case SemiringId::ExpectedUtility: {
      const auto& e = std::get<EuPair>(v);
      if (!nonneg_real(e.p) || e.p > 1.0 + kRelTol || !std::isfinite(e.eu)) fail("expected-utility pair out of range");
      break;
    }
    case SemiringId::NatPair: {
      const auto& n = std::get<NatPair>(v);
      if (n.n1 < 0 || n.n2 < 0) fail("negative count");
      break;
    }
    case SemiringId::MapArgmax:
      if (!nonneg_real(std::get<MapValue>(v).score)) fail("negative or non-finite score");
      break;
    case SemiringId::MeuArgmax: {
      const auto x = std::get<MeuValue>(v).score;
      if (!x.is_neg_inf() && !std::isfinite(x.value())) fail("non-finite score");
      break;
    }
  }
}

inline std::string format_litset(const LitSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

inline std::string format_value(const Value& v) {
  struct Fmt {
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(ExtReal x) const { return format_real(x); }
    std::string operator()(const EuPair& e) const { return "(" + format_real(e.p) + ", " + format_real(e.eu) + ")"; }
    std::string operator()(const NatPair& n) const { return "(" + n.n1.str() + ", " + n.n2.str() + ")"; }
    std::string operator()(const MapValue& m) const { return format_real(m.score) + " " + format_litset(m.witness); }
    std::string operator()(const MeuValue& m) const { return format_real(m.score) + " " + format_litset(m.witness); }
  };
  return std::visit(Fmt{}, v);
}

// ---------------------------------------------------------------------------
// Transformations between inner and outer semirings

// The inner semiring a transform is declared on.
inline SemiringId transform_inner(TransformId t) {
  switch (t) {
    case TransformId::Identity: return SemiringId::Probability;
    case TransformId::ProbToMapArgmax: return SemiringId::Probability;
    case TransformId::EuProject: return SemiringId::ExpectedUtility;
    case TransformId::NatPairRatio: return SemiringId::NatPair;
  }
  return SemiringId::Probability;
}

// The outer semiring used when none is given explicitly.
inline SemiringId transform_outer(TransformId t) {
  switch (t) {
    case TransformId::Identity: return SemiringId::Probability;
    case TransformId::ProbToMapArgmax: return SemiringId::MapArgmax;
    case TransformId::EuProject: return SemiringId::MaxPlus;
    case TransformId::NatPairRatio: return SemiringId::Probability;
  }
  return SemiringId::Probability;
}

inline bool transform_accepts(TransformId t, SemiringId inner, SemiringId outer) {
  auto real = [](SemiringId s) { return s == SemiringId::Probability || s == SemiringId::MaxTimes; };
  switch (t) {
    case TransformId::Identity: return inner == outer || (real(inner) && real(outer));
    case TransformId::ProbToMapArgmax: return real(inner) && outer == SemiringId::MapArgmax;
    case TransformId::EuProject:
      return inner == SemiringId::ExpectedUtility &&
             (outer == SemiringId::MaxPlus || outer == SemiringId::MeuArgmax);
    case TransformId::NatPairRatio: return inner == SemiringId::NatPair && real(outer);
  }
  return false;
}

inline double natpair_ratio(const NatPair& n) {
  if (n.n2 == 0) return 0.0;
  return boost::multiprecision::cpp_rational(n.n1, n.n2).convert_to<double>();
}

// Maps an inner value to the outer semiring `outer`.
inline Value transform(TransformId t, const Value& v, SemiringId outer) {
  switch (t) {
    case TransformId::Identity:
      return v;
    case TransformId::ProbToMapArgmax:
      return MapValue{detail::expect<semirings::Probability>(v), {}};
    case TransformId::EuProject: {
      const auto& e = detail::expect<semirings::ExpectedUtility>(v);
      const ExtReal x = e.p == 0.0 ? ExtReal::neg_inf() : ExtReal(e.eu);
      if (outer == SemiringId::MeuArgmax) return MeuValue{x, {}};
      return x;
    }
    case TransformId::NatPairRatio:
      return natpair_ratio(detail::expect<semirings::NatPairs>(v));
  }
  throw InvalidValue("unknown transform");
}

inline Value transform(TransformId t, const Value& v) {
  if (t == TransformId::Identity) return v;
  return transform(t, v, transform_outer(t));
}

// t(0) = 0 across the two semirings; required of every 2AMC transform.
inline bool preserves_zero(TransformId t, SemiringId outer) {
  const Value z = transform(t, zero(transform_inner(t)), outer);
  return belongs_to(outer, z) && equal(outer, z, zero(outer));
}

using ValuePair = std::pair<Value, Value>;

enum class HomomorphismDomain {
  Declared,  // reject samples outside the transform's proven domain
  Any,       // evaluate the equations on whatever is given
};

// True iff the value lies in the domain on which t is known to be a monoid
// homomorphism: n1 <= n2 for the count ratio, (1,u) or (0,0) for EU
// projection, everything for the others.
inline bool in_homomorphism_domain(TransformId t, const Value& v) {
  switch (t) {
    case TransformId::NatPairRatio: {
      const auto* n = std::get_if<NatPair>(&v);
      return n && n->n1 >= 0 && n->n1 <= n->n2;
    }
    case TransformId::EuProject: {
      const auto* e = std::get_if<EuPair>(&v);
      return e && (approx_equal(e->p, 1.0) || (e->p == 0.0 && e->eu == 0.0));
    }
    default:
      return belongs_to(transform_inner(t), v);
  }
}

// Checks t(a * b) = t(a) * t(b) on every sample pair, and t(1) = 1.
inline bool check_homomorphism(TransformId t, std::span<const ValuePair> samples,
                               HomomorphismDomain domain = HomomorphismDomain::Declared) {
  const SemiringId in = transform_inner(t);
  const SemiringId out = transform_outer(t);
  if (!equal(out, transform(t, one(in), out), one(out))) return false;
  for (const auto& [a, b] : samples) {
    if (domain == HomomorphismDomain::Declared &&
        (!in_homomorphism_domain(t, a) || !in_homomorphism_domain(t, b))) {
      throw PreconditionError("sample " + format_value(a) + " / " + format_value(b) +
                              " lies outside the declared homomorphism domain of '" + std::string(to_token(t)) + "'");
    }
    const Value lhs = transform(t, mul(in, a, b), out);
    const Value rhs = mul(out, transform(t, a, out), transform(t, b, out));
    if (!equal(out, lhs, rhs)) return false;
  }
  return true;
}

}  // namespace twoamc
