#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "racerlite/ir.hpp"

namespace racerlite {

// ---------------------------------------------------------------------------
// Intervals with stride (64-bit, saturating; INT64_MIN/MAX act as -inf/+inf)
// ---------------------------------------------------------------------------

inline constexpr long long kIntMin = INT64_MIN;
inline constexpr long long kIntMax = INT64_MAX;

inline long long sat_add(long long a, long long b) {
  if (a > 0 && b > kIntMax - a) return kIntMax;
  if (a < 0 && b < kIntMin - a) return kIntMin;
  return a + b;
}
inline long long sat_sub(long long a, long long b) {
  if (b == kIntMin) return a >= 0 ? kIntMax : sat_add(a, kIntMax);
  return sat_add(a, -b);
}
inline long long sat_mul(long long a, long long b) {
  if (a == 0 || b == 0) return 0;
  if (a == kIntMin || b == kIntMin) return (a < 0) == (b < 0) ? kIntMax : kIntMin;
  long long r = a * b;
  if (a != r / b) return (a < 0) == (b < 0) ? kIntMax : kIntMin;
  return r;
}
inline long long sat_neg(long long a) { return a == kIntMin ? kIntMax : -a; }

struct Interval {
  long long lo = 0;
  long long hi = 0;
  long long stride = 1;  // all members are congruent to lo modulo stride

  static Interval point(long long v) { return {v, v, 1}; }
  static Interval range(long long lo, long long hi, long long stride = 1) {
    Interval iv{lo, hi, stride};
    iv.normalize();
    return iv;
  }
  static Interval top() { return {kIntMin, kIntMax, 1}; }

  bool is_singleton() const { return lo == hi; }
  bool is_top() const { return lo == kIntMin && hi == kIntMax; }
  bool finite() const { return lo != kIntMin && hi != kIntMax; }

  void normalize() {
    if (lo > hi) { lo = 0; hi = -1; return; }  // callers guard against empty
    if (stride < 1) stride = 1;
    if (lo == kIntMin || lo == hi) { stride = 1; return; }
    if (hi != kIntMax) hi = lo + ((hi - lo) / stride) * stride;
    if (lo == hi) stride = 1;
  }

  bool contains(long long v) const {
    if (v < lo || v > hi) return false;
    if (stride <= 1 || lo == kIntMin) return true;
    return (v - lo) % stride == 0;
  }

  std::optional<long long> count() const {
    if (!finite()) return std::nullopt;
    return (hi - lo) / std::max(1LL, stride) + 1;
  }

  bool operator==(const Interval &o) const {
    return lo == o.lo && hi == o.hi && stride == o.stride;
  }
  bool operator<(const Interval &o) const {
    return std::tie(lo, hi, stride) < std::tie(o.lo, o.hi, o.stride);
  }

  std::string str() const {
    auto b = [](long long v) {
      if (v == kIntMin) return std::string("-inf");
      if (v == kIntMax) return std::string("+inf");
      return std::to_string(v);
    };
    std::string s = "[" + b(lo) + "," + b(hi) + "]";
    if (stride > 1) s += "%" + std::to_string(stride);
    return s;
  }
};

inline bool iv_leq(const Interval &a, const Interval &b) {
  if (a.lo < b.lo || a.hi > b.hi) return false;
  if (b.stride <= 1 || b.lo == kIntMin) return true;
  if (a.lo == kIntMin) return false;
  if ((a.lo - b.lo) % b.stride != 0) return false;
  if (a.is_singleton()) return true;
  return a.stride % b.stride == 0;
}

inline Interval iv_join(const Interval &a, const Interval &b) {
  Interval r;
  r.lo = std::min(a.lo, b.lo);
  r.hi = std::max(a.hi, b.hi);
  if (r.lo == kIntMin) {
    r.stride = 1;
  } else {
    // singletons impose no congruence of their own
    long long sa = a.is_singleton() ? 0 : a.stride;
    long long sb = b.is_singleton() ? 0 : b.stride;
    long long s = std::gcd(sa, sb);
    long long d = a.lo > b.lo ? a.lo - b.lo : b.lo - a.lo;
    s = std::gcd(s, d);
    r.stride = std::max(1LL, s);
  }
  r.normalize();
  return r;
}

inline std::optional<Interval> iv_meet(const Interval &a, const Interval &b) {
  // Conservative: ignores stride incompatibilities beyond bound clamping.
  Interval r;
  r.lo = std::max(a.lo, b.lo);
  r.hi = std::min(a.hi, b.hi);
  if (r.lo > r.hi) return std::nullopt;
  r.stride = std::max(a.stride, b.stride);
  if (r.lo != kIntMin && r.stride > 1) {
    // realign lo upward to the stride of the finer operand
    const Interval &f = a.stride >= b.stride ? a : b;
    if (f.lo != kIntMin) {
      long long rem = ((r.lo - f.lo) % f.stride + f.stride) % f.stride;
      if (rem) r.lo = sat_add(r.lo, f.stride - rem);
      if (r.lo > r.hi) return std::nullopt;
    }
  }
  r.normalize();
  return r;
}

// Threshold ladder used by widening before giving up to +-inf.
inline const std::vector<long long> &widen_ladder() {
  static const std::vector<long long> l = {0, 1, 16, 256, kIntMax};
  return l;
}

inline Interval iv_widen(const Interval &prev, const Interval &next) {
  Interval j = iv_join(prev, next);
  Interval r = j;
  if (j.lo < prev.lo) {
    long long lo = kIntMin;
    for (auto v : widen_ladder()) {
      long long cand = v == kIntMax ? kIntMin : -v;
      if (cand <= j.lo && cand > lo) lo = cand;
    }
    r.lo = lo;
  } else {
    r.lo = prev.lo;
  }
  if (j.hi > prev.hi) {
    long long hi = kIntMax;
    for (auto v : widen_ladder())
      if (v >= j.hi && v < hi) hi = v;
    r.hi = hi;
  } else {
    r.hi = prev.hi;
  }
  if (r.lo != j.lo || r.hi != j.hi) r.stride = 1;
  r.normalize();
  return r;
}

// ---------------------------------------------------------------------------
// Bases and addresses
// ---------------------------------------------------------------------------

enum class BaseKind { Null, Global, Local, Formal, Dynamic, Func, Unknown };

struct Base {
  BaseKind kind = BaseKind::Global;
  std::string func;  // owner function for Local/Formal
  std::string name;  // variable or function name
  StmtId site = kNoStmt;  // allocation site for Dynamic

  // Metadata; not part of the identity.
  TypePtr type;
  bool weak = false;
  std::optional<long long> size;

  static Base global(std::string n, TypePtr t = nullptr) {
    Base b;
    b.kind = BaseKind::Global;
    b.name = std::move(n);
    b.type = t;
    if (t) b.size = size_of(t);
    return b;
  }
  static Base local(std::string fn, std::string n, TypePtr t = nullptr) {
    Base b;
    b.kind = BaseKind::Local;
    b.func = std::move(fn);
    b.name = std::move(n);
    b.type = t;
    if (t) b.size = size_of(t);
    return b;
  }
  static Base formal(std::string fn, std::string n, TypePtr t = nullptr) {
    Base b = local(std::move(fn), std::move(n), std::move(t));
    b.kind = BaseKind::Formal;
    return b;
  }
  static Base dynamic(StmtId site, bool weak, std::optional<long long> size = {}) {
    Base b;
    b.kind = BaseKind::Dynamic;
    b.site = site;
    b.name = "malloc@" + std::to_string(site);
    b.weak = weak;
    b.size = size;
    b.type = ty_int();
    return b;
  }
  static Base function_base(std::string n) {
    Base b;
    b.kind = BaseKind::Func;
    b.name = std::move(n);
    return b;
  }
  static Base unknown() {
    Base b;
    b.kind = BaseKind::Unknown;
    b.name = "?";
    return b;
  }

  auto key() const { return std::tie(kind, func, name, site); }
  bool operator<(const Base &o) const { return key() < o.key(); }
  bool operator==(const Base &o) const { return key() == o.key(); }

  std::string str() const {
    switch (kind) {
    case BaseKind::Null: return "NULL";
    case BaseKind::Global: return name;
    case BaseKind::Local:
    case BaseKind::Formal: return func + "::" + name;
    case BaseKind::Dynamic: return name;
    case BaseKind::Func: return name + "()";
    case BaseKind::Unknown: return "<unknown>";
    }
    return "?";
  }
};

struct Address {
  Base base;
  Interval offset = Interval::point(0);

  bool operator<(const Address &o) const {
    if (base < o.base) return true;
    if (o.base < base) return false;
    return offset < o.offset;
  }
  bool operator==(const Address &o) const {
    return base == o.base && offset == o.offset;
  }
  std::string str() const { return base.str() + "@" + offset.str(); }
};

/// Can the byte ranges [offset, offset+size) of two same-base addresses
/// intersect for some concretization?
inline bool offsets_may_overlap(const Address &a, const Address &b,
                                std::optional<long long> size_a,
                                std::optional<long long> size_b) {
  if (!(a.base == b.base)) return false;
  if (!size_a || !size_b) return true;  // unknown sizes: assume the worst
  auto ca = a.offset.count(), cb = b.offset.count();
  constexpr long long kEnumCap = 256;
  if (!ca || !cb || *ca > kEnumCap || *cb > kEnumCap) {
    // ranges view: [lo_a, hi_a + size_a) vs [lo_b, hi_b + size_b)
    return a.offset.lo < sat_add(b.offset.hi, *size_b) &&
           b.offset.lo < sat_add(a.offset.hi, *size_a);
  }
  for (long long oa = a.offset.lo; oa <= a.offset.hi; oa += a.offset.stride) {
    for (long long ob = b.offset.lo; ob <= b.offset.hi; ob += b.offset.stride)
      if (oa < ob + *size_b && ob < oa + *size_a) return true;
    if (a.offset.stride == 0) break;
  }
  return false;
}

/// Do the byte ranges intersect for every concretization?
inline bool offsets_must_overlap(const Address &a, const Address &b,
                                 std::optional<long long> size_a,
                                 std::optional<long long> size_b) {
  if (!(a.base == b.base)) return false;
  if (!size_a || !size_b) return false;
  auto ca = a.offset.count(), cb = b.offset.count();
  constexpr long long kEnumCap = 256;
  if (!ca || !cb || *ca > kEnumCap || *cb > kEnumCap) return false;
  for (long long oa = a.offset.lo; oa <= a.offset.hi; oa += a.offset.stride) {
    for (long long ob = b.offset.lo; ob <= b.offset.hi; ob += b.offset.stride)
      if (!(oa < ob + *size_b && ob < oa + *size_a)) return false;
    if (a.offset.stride == 0) break;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Abstract values and states
// ---------------------------------------------------------------------------

inline constexpr size_t kPointerSetCap = 16;

struct AbstractValue {
  enum class Kind { Bottom, Int, Ptr, Top };
  Kind kind = Kind::Bottom;
  Interval iv;
  std::set<Address> ptrs;
  bool may_null = false;

  static AbstractValue bottom() { return {}; }
  static AbstractValue top() {
    AbstractValue v;
    v.kind = Kind::Top;
    return v;
  }
  static AbstractValue of_interval(Interval i) {
    AbstractValue v;
    v.kind = Kind::Int;
    v.iv = i;
    return v;
  }
  static AbstractValue of_int(long long x) { return of_interval(Interval::point(x)); }
  static AbstractValue of_ptrs(std::set<Address> p, bool null_ok = false) {
    AbstractValue v;
    v.kind = Kind::Ptr;
    v.ptrs = std::move(p);
    v.may_null = null_ok;
    v.collapse_if_large();
    return v;
  }
  static AbstractValue null_ptr() { return of_ptrs({}, true); }

  bool is_bottom() const { return kind == Kind::Bottom; }
  bool is_top() const { return kind == Kind::Top; }
  bool is_only_null() const { return kind == Kind::Ptr && ptrs.empty() && may_null; }

  void collapse_if_large() {
    if (kind != Kind::Ptr || ptrs.size() <= kPointerSetCap) return;
    std::set<Address> collapsed;
    for (auto &a : ptrs) {
      Address full = a;
      full.offset = Interval::top();
      collapsed.insert(full);
    }
    // keep one full-range entry per base
    std::set<Address> out;
    const Base *last = nullptr;
    for (auto &a : collapsed) {
      if (last && *last == a.base) continue;
      out.insert(a);
      last = &a.base;
    }
    ptrs = std::move(out);
  }

  std::string str() const {
    switch (kind) {
    case Kind::Bottom: return "_|_";
    case Kind::Top: return "T";
    case Kind::Int: return iv.str();
    case Kind::Ptr: {
      std::string s = "{";
      bool first = true;
      for (auto &p : ptrs) {
        if (!first) s += ",";
        s += p.str();
        first = false;
      }
      if (may_null) s += std::string(first ? "" : ",") + "NULL";
      return s + "}";
    }
    }
    return "?";
  }

  bool operator==(const AbstractValue &o) const {
    return kind == o.kind && iv == o.iv && ptrs == o.ptrs && may_null == o.may_null;
  }
};

inline AbstractValue join_value(const AbstractValue &a, const AbstractValue &b) {
  using K = AbstractValue::Kind;
  if (a.kind == K::Bottom) return b;
  if (b.kind == K::Bottom) return a;
  if (a.kind == K::Top || b.kind == K::Top) return AbstractValue::top();
  if (a.kind != b.kind) return AbstractValue::top();
  if (a.kind == K::Int) return AbstractValue::of_interval(iv_join(a.iv, b.iv));
  std::set<Address> p = a.ptrs;
  p.insert(b.ptrs.begin(), b.ptrs.end());
  return AbstractValue::of_ptrs(std::move(p), a.may_null || b.may_null);
}

inline AbstractValue widen_value(const AbstractValue &prev, const AbstractValue &next) {
  using K = AbstractValue::Kind;
  if (prev.kind == K::Bottom) return next;
  if (next.kind == K::Bottom) return prev;
  if (prev.kind != next.kind) return AbstractValue::top();
  if (prev.kind == K::Int) return AbstractValue::of_interval(iv_widen(prev.iv, next.iv));
  // Pointer sets widen by union; the cardinality cap bounds the chain.
  return join_value(prev, next);
}

inline bool leq_value(const AbstractValue &a, const AbstractValue &b) {
  using K = AbstractValue::Kind;
  if (a.kind == K::Bottom) return true;
  if (b.kind == K::Top) return true;
  if (b.kind == K::Bottom || a.kind == K::Top) return false;
  if (a.kind != b.kind) return false;
  if (a.kind == K::Int) return iv_leq(a.iv, b.iv);
  if (a.may_null && !b.may_null) return false;
  for (auto &pa : a.ptrs) {
    bool covered = false;
    for (auto &pb : b.ptrs)
      if (pa.base == pb.base && iv_leq(pa.offset, pb.offset)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

struct AbstractState {
  bool reachable = false;
  std::map<Base, AbstractValue> env;

  static AbstractState bottom() { return {}; }
  static AbstractState initial() {
    AbstractState s;
    s.reachable = true;
    return s;
  }

  const AbstractValue *find(const Base &b) const {
    auto it = env.find(b);
    return it == env.end() ? nullptr : &it->second;
  }
  void set(const Base &b, AbstractValue v) { env[b] = std::move(v); }

  bool operator==(const AbstractState &o) const {
    return reachable == o.reachable && env == o.env;
  }

  std::string str() const {
    if (!reachable) return "_|_";
    std::string s = "{";
    bool first = true;
    for (auto &[b, v] : env) {
      if (!first) s += ", ";
      s += b.str() + " -> " + v.str();
      first = false;
    }
    return s + "}";
  }
};

inline AbstractState join_state(const AbstractState &a, const AbstractState &b) {
  if (!a.reachable) return b;
  if (!b.reachable) return a;
  AbstractState r = a;
  for (auto &[k, v] : b.env) {
    auto it = r.env.find(k);
    if (it == r.env.end()) r.env.emplace(k, v);
    else it->second = join_value(it->second, v);
  }
  return r;
}

inline AbstractState widen_state(const AbstractState &prev, const AbstractState &next) {
  if (!prev.reachable) return next;
  if (!next.reachable) return prev;
  AbstractState r = prev;
  for (auto &[k, v] : next.env) {
    auto it = r.env.find(k);
    if (it == r.env.end()) r.env.emplace(k, v);
    else it->second = widen_value(it->second, v);
  }
  return r;
}

inline bool leq_state(const AbstractState &a, const AbstractState &b) {
  if (!a.reachable) return true;
  if (!b.reachable) return false;
  for (auto &[k, v] : a.env) {
    auto it = b.env.find(k);
    if (it == b.env.end()) {
      if (!v.is_bottom()) return false;
    } else if (!leq_value(v, it->second)) {
      return false;
    }
  }
  return true;
}

inline std::string state_fingerprint(const AbstractState &s) { return s.str(); }

} // namespace racerlite
