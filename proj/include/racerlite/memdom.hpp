#pragma once

#include <optional>
#include <set>

#include "racerlite/absdomain.hpp"
#include "racerlite/ir.hpp"

namespace racerlite {

/// Shared lookup context for expression evaluation: the program (for types
/// and qualifiers) and the set of allocation sites that may execute more than
/// once (their bases are weak).
struct MemEnv {
  const IRProgram *prog = nullptr;
  const std::set<StmtId> *weak_sites = nullptr;

  bool is_weak_site(StmtId s) const { return weak_sites && weak_sites->count(s); }
};

inline Base base_of_var(const ExprPtr &e) {
  switch (e->scope) {
  case VarScope::Global: return Base::global(e->name, e->type);
  case VarScope::Local: return Base::local(e->owner, e->name, e->type);
  case VarScope::Formal: return Base::formal(e->owner, e->name, e->type);
  }
  return Base::global(e->name, e->type);
}

enum class Truth { False, True, Maybe };

inline Truth truthiness(const AbstractValue &v) {
  using K = AbstractValue::Kind;
  switch (v.kind) {
  case K::Bottom: return Truth::Maybe;
  case K::Top: return Truth::Maybe;
  case K::Int:
    if (v.iv.lo == 0 && v.iv.hi == 0) return Truth::False;
    if (!v.iv.contains(0)) return Truth::True;
    return Truth::Maybe;
  case K::Ptr:
    if (v.is_only_null()) return Truth::False;
    if (!v.may_null && !v.ptrs.empty()) return Truth::True;
    return Truth::Maybe;
  }
  return Truth::Maybe;
}

// ---------------------------------------------------------------------------
// Interval arithmetic
// ---------------------------------------------------------------------------

namespace detail {

inline Interval iv_add(const Interval &a, const Interval &b) {
  Interval r;
  r.lo = sat_add(a.lo, b.lo);
  r.hi = sat_add(a.hi, b.hi);
  r.stride = std::max(1LL, std::gcd(a.stride, b.stride));
  r.normalize();
  return r;
}

inline Interval iv_sub(const Interval &a, const Interval &b) {
  Interval r;
  r.lo = sat_sub(a.lo, b.hi);
  r.hi = sat_sub(a.hi, b.lo);
  r.stride = std::max(1LL, std::gcd(a.stride, b.stride));
  r.normalize();
  return r;
}

inline Interval iv_mul(const Interval &a, const Interval &b) {
  long long c[4] = {sat_mul(a.lo, b.lo), sat_mul(a.lo, b.hi), sat_mul(a.hi, b.lo),
                    sat_mul(a.hi, b.hi)};
  Interval r;
  r.lo = std::min({c[0], c[1], c[2], c[3]});
  r.hi = std::max({c[0], c[1], c[2], c[3]});
  if (a.is_singleton() && a.lo != 0)
    r.stride = std::max(1LL, sat_mul(b.stride, a.lo < 0 ? -a.lo : a.lo));
  else if (b.is_singleton() && b.lo != 0)
    r.stride = std::max(1LL, sat_mul(a.stride, b.lo < 0 ? -b.lo : b.lo));
  else
    r.stride = 1;
  r.normalize();
  return r;
}

inline Interval iv_div(const Interval &a, const Interval &b) {
  if (b.contains(0)) return Interval::top();
  long long c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  Interval r;
  r.lo = std::min({c[0], c[1], c[2], c[3]});
  r.hi = std::max({c[0], c[1], c[2], c[3]});
  r.stride = 1;
  r.normalize();
  return r;
}

inline Interval iv_mod(const Interval &a, const Interval &b) {
  if (b.is_singleton() && b.lo > 0) {
    long long d = b.lo;
    if (a.is_singleton()) return Interval::point(a.lo % d);
    if (a.lo >= 0) return Interval::range(0, std::min(a.hi, d - 1));
    return Interval::range(-(d - 1), d - 1);
  }
  return Interval::top();
}

inline Interval iv_from_truth(Truth t) {
  switch (t) {
  case Truth::False: return Interval::point(0);
  case Truth::True: return Interval::point(1);
  case Truth::Maybe: return Interval::range(0, 1);
  }
  return Interval::range(0, 1);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct LvalueResult {
  std::set<Address> addrs;
  bool surely_invalid = false;  // e.g. dereferencing a definitely-null pointer
  bool unknown_target = false;  // dereferencing Top
};

inline AbstractValue eval_expr(const MemEnv &env, const AbstractState &s,
                               const ExprPtr &e);
inline AbstractValue eval_binary(const MemEnv &env, const ExprPtr &e,
                                 const AbstractValue &a, const AbstractValue &b);

inline LvalueResult eval_lvalue(const MemEnv &env, const AbstractState &s,
                                const ExprPtr &e) {
  LvalueResult r;
  switch (e->kind) {
  case ExprKind::Var:
    r.addrs.insert({base_of_var(e), Interval::point(0)});
    return r;
  case ExprKind::Deref: {
    AbstractValue v = eval_expr(env, s, e->args[0]);
    if (v.kind == AbstractValue::Kind::Ptr) {
      for (auto &a : v.ptrs)
        if (a.base.kind != BaseKind::Func) r.addrs.insert(a);
      if (r.addrs.empty()) r.surely_invalid = true;
    } else if (v.is_bottom()) {
      r.surely_invalid = true;
    } else {
      r.unknown_target = true;
    }
    return r;
  }
  case ExprKind::Index: {
    const ExprPtr &arr = e->args[0];
    std::set<Address> bases;
    if (arr->kind == ExprKind::Var && arr->type && arr->type->is_array()) {
      bases.insert({base_of_var(arr), Interval::point(0)});
    } else {
      AbstractValue v = eval_expr(env, s, arr);
      if (v.kind == AbstractValue::Kind::Ptr) {
        for (auto &a : v.ptrs)
          if (a.base.kind != BaseKind::Func) bases.insert(a);
        if (bases.empty()) r.surely_invalid = true;
      } else if (v.is_bottom()) {
        r.surely_invalid = true;
      } else {
        r.unknown_target = true;
      }
    }
    AbstractValue idx = eval_expr(env, s, e->args[1]);
    Interval iv = idx.kind == AbstractValue::Kind::Int ? idx.iv : Interval::top();
    long long esz = size_of(e->type);
    Interval byte_off = detail::iv_mul(iv, Interval::point(esz > 0 ? esz : 1));
    for (auto a : bases) {
      a.offset = detail::iv_add(a.offset, byte_off);
      r.addrs.insert(a);
    }
    return r;
  }
  default:
    r.unknown_target = true;
    return r;
  }
}

inline AbstractValue load(const AbstractState &s, const Address &a) {
  if (a.base.kind == BaseKind::Unknown) return AbstractValue::top();
  const AbstractValue *v = s.find(a.base);
  return v ? *v : AbstractValue::top();
}

inline AbstractValue eval_expr(const MemEnv &env, const AbstractState &s,
                               const ExprPtr &e) {
  using K = AbstractValue::Kind;
  if (!e) return AbstractValue::top();
  switch (e->kind) {
  case ExprKind::IntLit: return AbstractValue::of_int(e->int_val);
  case ExprKind::Null: return AbstractValue::null_ptr();
  case ExprKind::Nondet: return AbstractValue::top();
  case ExprKind::FuncRef:
    return AbstractValue::of_ptrs({{Base::function_base(e->name), Interval::point(0)}});
  case ExprKind::Var: {
    if (e->type && e->type->is_array())
      return AbstractValue::of_ptrs({{base_of_var(e), Interval::point(0)}});
    return load(s, {base_of_var(e), Interval::point(0)});
  }
  case ExprKind::AddrOf: {
    LvalueResult lv = eval_lvalue(env, s, e->args[0]);
    if (lv.unknown_target) return AbstractValue::top();
    return AbstractValue::of_ptrs(lv.addrs);
  }
  case ExprKind::Deref:
  case ExprKind::Index: {
    LvalueResult lv = eval_lvalue(env, s, e);
    if (lv.unknown_target) return AbstractValue::top();
    if (lv.addrs.empty()) return AbstractValue::bottom();
    AbstractValue v = AbstractValue::bottom();
    for (auto &a : lv.addrs) v = join_value(v, load(s, a));
    return v;
  }
  case ExprKind::Cast: {
    AbstractValue v = eval_expr(env, s, e->args[0]);
    bool to_ptr = e->cast_type && e->cast_type->is_pointer();
    if (to_ptr) {
      if (v.kind == K::Ptr) return v;
      if (v.kind == K::Int && v.iv == Interval::point(0)) return AbstractValue::null_ptr();
      return AbstractValue::top();
    }
    if (v.kind == K::Int) return v;
    return AbstractValue::top();
  }
  case ExprKind::Unary: {
    AbstractValue v = eval_expr(env, s, e->args[0]);
    if (e->un_op == UnOp::Not)
      return AbstractValue::of_interval(detail::iv_from_truth([&] {
        Truth t = truthiness(v);
        if (t == Truth::False) return Truth::True;
        if (t == Truth::True) return Truth::False;
        return Truth::Maybe;
      }()));
    if (v.kind != K::Int) return AbstractValue::top();
    Interval r;
    r.lo = sat_neg(v.iv.hi);
    r.hi = sat_neg(v.iv.lo);
    r.stride = v.iv.stride;
    r.normalize();
    return AbstractValue::of_interval(r);
  }
  case ExprKind::Binary: {
    AbstractValue a = eval_expr(env, s, e->args[0]);
    AbstractValue b = eval_expr(env, s, e->args[1]);
    return eval_binary(env, e, a, b);
  }
  }
  return AbstractValue::top();
}

inline AbstractValue eval_binary(const MemEnv &env, const ExprPtr &e,
                                 const AbstractValue &a, const AbstractValue &b) {
  using K = AbstractValue::Kind;
  BinOp op = e->bin_op;
  if (a.is_bottom() || b.is_bottom()) return AbstractValue::bottom();

  // pointer arithmetic: shift offsets by index * element size
  auto shift = [&](const AbstractValue &p, const AbstractValue &i, bool neg,
                   const ExprPtr &pe) -> AbstractValue {
    if (i.kind != K::Int) return AbstractValue::top();
    long long esz = 1;
    if (pe->type && pe->type->elem) esz = std::max(1LL, size_of(pe->type->elem));
    Interval d = detail::iv_mul(i.iv, Interval::point(esz));
    std::set<Address> out;
    for (auto addr : p.ptrs) {
      addr.offset = neg ? detail::iv_sub(addr.offset, d) : detail::iv_add(addr.offset, d);
      out.insert(addr);
    }
    return AbstractValue::of_ptrs(std::move(out), p.may_null);
  };
  if ((op == BinOp::Add || op == BinOp::Sub)) {
    if (a.kind == K::Ptr && b.kind != K::Ptr)
      return shift(a, b, op == BinOp::Sub, e->args[0]);
    if (b.kind == K::Ptr && a.kind != K::Ptr && op == BinOp::Add)
      return shift(b, a, false, e->args[1]);
  }

  switch (op) {
  case BinOp::LAnd:
  case BinOp::LOr: {
    Truth ta = truthiness(a), tb = truthiness(b);
    if (op == BinOp::LAnd) {
      if (ta == Truth::False || tb == Truth::False)
        return AbstractValue::of_int(0);
      if (ta == Truth::True && tb == Truth::True) return AbstractValue::of_int(1);
    } else {
      if (ta == Truth::True || tb == Truth::True) return AbstractValue::of_int(1);
      if (ta == Truth::False && tb == Truth::False) return AbstractValue::of_int(0);
    }
    return AbstractValue::of_interval(Interval::range(0, 1));
  }
  default: break;
  }

  // comparisons
  auto cmp_result = [&](Truth t) {
    return AbstractValue::of_interval(detail::iv_from_truth(t));
  };
  bool is_cmp = op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt ||
                op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge;
  if (is_cmp) {
    if (a.kind == K::Ptr || b.kind == K::Ptr) {
      // pointer comparisons: decide null-vs-null, otherwise stay imprecise
      if (op == BinOp::Eq || op == BinOp::Ne) {
        bool flip = op == BinOp::Ne;
        auto mk = [&](Truth t) {
          if (t == Truth::Maybe) return cmp_result(Truth::Maybe);
          bool eq = t == Truth::True;
          return cmp_result(eq != flip ? Truth::True : Truth::False);
        };
        const AbstractValue *pv = a.kind == K::Ptr ? &a : &b;
        const AbstractValue *ov = a.kind == K::Ptr ? &b : &a;
        bool other_null = ov->is_only_null() ||
                          (ov->kind == K::Int && ov->iv == Interval::point(0));
        if (other_null) {
          if (pv->is_only_null()) return mk(Truth::True);
          if (!pv->may_null && !pv->ptrs.empty()) return mk(Truth::False);
          return mk(Truth::Maybe);
        }
      }
      return cmp_result(Truth::Maybe);
    }
    if (a.kind != K::Int || b.kind != K::Int) return cmp_result(Truth::Maybe);
    const Interval &x = a.iv, &y = b.iv;
    auto t3 = [&](bool surely_true, bool surely_false) {
      return surely_true ? Truth::True : surely_false ? Truth::False : Truth::Maybe;
    };
    switch (op) {
    case BinOp::Eq:
      if (x.is_singleton() && y.is_singleton())
        return cmp_result(x.lo == y.lo ? Truth::True : Truth::False);
      return cmp_result(t3(false, x.hi < y.lo || y.hi < x.lo ||
                                      !iv_meet(x, y).has_value()));
    case BinOp::Ne:
      if (x.is_singleton() && y.is_singleton())
        return cmp_result(x.lo != y.lo ? Truth::True : Truth::False);
      return cmp_result(t3(x.hi < y.lo || y.hi < x.lo || !iv_meet(x, y).has_value(),
                           false));
    case BinOp::Lt: return cmp_result(t3(x.hi < y.lo, x.lo >= y.hi));
    case BinOp::Le: return cmp_result(t3(x.hi <= y.lo, x.lo > y.hi));
    case BinOp::Gt: return cmp_result(t3(x.lo > y.hi, x.hi <= y.lo));
    case BinOp::Ge: return cmp_result(t3(x.lo >= y.hi, x.hi < y.lo));
    default: break;
    }
  }

  if (a.kind != K::Int || b.kind != K::Int) return AbstractValue::top();
  switch (op) {
  case BinOp::Add: return AbstractValue::of_interval(detail::iv_add(a.iv, b.iv));
  case BinOp::Sub: return AbstractValue::of_interval(detail::iv_sub(a.iv, b.iv));
  case BinOp::Mul: return AbstractValue::of_interval(detail::iv_mul(a.iv, b.iv));
  case BinOp::Div: return AbstractValue::of_interval(detail::iv_div(a.iv, b.iv));
  case BinOp::Mod: return AbstractValue::of_interval(detail::iv_mod(a.iv, b.iv));
  default: return AbstractValue::top();
  }
  (void)env;
}

// ---------------------------------------------------------------------------
// Stores
// ---------------------------------------------------------------------------

inline bool strong_updatable(const Base &b) {
  switch (b.kind) {
  case BaseKind::Global:
  case BaseKind::Local:
  case BaseKind::Formal:
    return !(b.type && b.type->is_array());
  case BaseKind::Dynamic:
    return !b.weak;
  default:
    return false;
  }
}

inline void store(AbstractState &s, const std::set<Address> &addrs,
                  const AbstractValue &v, bool force_weak = false) {
  if (addrs.size() == 1 && !force_weak && strong_updatable(addrs.begin()->base)) {
    s.set(addrs.begin()->base, v);
    return;
  }
  for (auto &a : addrs) {
    if (a.base.kind == BaseKind::Unknown || a.base.kind == BaseKind::Func) continue;
    const AbstractValue *old = s.find(a.base);
    // absent cells are unconstrained; a weak update cannot refine them
    s.set(a.base, old ? join_value(*old, v) : AbstractValue::top());
  }
}

// ---------------------------------------------------------------------------
// Guard filtering
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<Interval> iv_remove_point(const Interval &iv, long long c) {
  if (!iv.contains(c)) return iv;
  if (iv.is_singleton()) return std::nullopt;  // empty
  if (iv.lo == c) return Interval::range(sat_add(c, iv.stride), iv.hi, iv.stride);
  if (iv.hi == c) return Interval::range(iv.lo, sat_sub(c, iv.stride), iv.stride);
  // interior point: representable only for the 3-element case {lo, c, hi}
  if (iv.lo != kIntMin && iv.hi != kIntMax && iv.hi - iv.lo == 2 * iv.stride &&
      c == iv.lo + iv.stride)
    return Interval::range(iv.lo, iv.hi, 2 * iv.stride);
  return iv;
}

inline std::optional<Interval> narrow_by_cmp(const Interval &v, BinOp op,
                                             const Interval &r) {
  switch (op) {
  case BinOp::Eq: return iv_meet(v, r);
  case BinOp::Ne:
    if (r.is_singleton()) return iv_remove_point(v, r.lo);
    return v;
  case BinOp::Lt:
    if (r.hi == kIntMax) return v;
    return iv_meet(v, Interval{kIntMin, sat_sub(r.hi, 1), 1});
  case BinOp::Le: return iv_meet(v, Interval{kIntMin, r.hi, 1});
  case BinOp::Gt:
    if (r.lo == kIntMin) return v;
    return iv_meet(v, Interval{sat_add(r.lo, 1), kIntMax, 1});
  case BinOp::Ge: return iv_meet(v, Interval{r.lo, kIntMax, 1});
  default: return v;
  }
}

inline BinOp negate_cmp(BinOp op) {
  switch (op) {
  case BinOp::Eq: return BinOp::Ne;
  case BinOp::Ne: return BinOp::Eq;
  case BinOp::Lt: return BinOp::Ge;
  case BinOp::Le: return BinOp::Gt;
  case BinOp::Gt: return BinOp::Le;
  case BinOp::Ge: return BinOp::Lt;
  default: return op;
  }
}

inline BinOp flip_cmp(BinOp op) {
  switch (op) {
  case BinOp::Lt: return BinOp::Gt;
  case BinOp::Le: return BinOp::Ge;
  case BinOp::Gt: return BinOp::Lt;
  case BinOp::Ge: return BinOp::Le;
  default: return op;  // Eq/Ne symmetric
  }
}

} // namespace detail

/// Restricts `s` to executions where `cond` evaluates to `taken`.
/// Unsatisfiable guards yield an unreachable state.
inline AbstractState filter_state(const MemEnv &env, const AbstractState &s,
                                  const ExprPtr &cond, bool taken) {
  if (!s.reachable) return s;
  AbstractValue cv = eval_expr(env, s, cond);
  Truth t = truthiness(cv);
  if ((t == Truth::False && taken) || (t == Truth::True && !taken))
    return AbstractState::bottom();

  AbstractState out = s;

  auto refine_lvalue = [&](const ExprPtr &lv, auto refine_fn) {
    LvalueResult res = eval_lvalue(env, out, lv);
    if (res.addrs.size() != 1) return;
    const Base &b = res.addrs.begin()->base;
    if (!strong_updatable(b)) return;
    const AbstractValue *old = out.find(b);
    AbstractValue cur = old ? *old : AbstractValue::top();
    AbstractValue next = refine_fn(cur);
    if (next.is_bottom()) out = AbstractState::bottom();
    else out.set(b, next);
  };

  auto is_lvalue = [](const ExprPtr &e) {
    return e->kind == ExprKind::Var || e->kind == ExprKind::Deref ||
           e->kind == ExprKind::Index;
  };
  auto strip = [](ExprPtr e) {
    while (e->kind == ExprKind::Cast) e = e->args[0];
    return e;
  };

  ExprPtr c = strip(cond);
  switch (c->kind) {
  case ExprKind::Unary:
    if (c->un_op == UnOp::Not) return filter_state(env, s, c->args[0], !taken);
    break;
  case ExprKind::Binary: {
    BinOp op = c->bin_op;
    if (op == BinOp::LAnd && taken) {
      AbstractState r = filter_state(env, s, c->args[0], true);
      return filter_state(env, r, c->args[1], true);
    }
    if (op == BinOp::LOr && !taken) {
      AbstractState r = filter_state(env, s, c->args[0], false);
      return filter_state(env, r, c->args[1], false);
    }
    bool is_cmp = op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt ||
                  op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge;
    if (!is_cmp) break;
    BinOp eff = taken ? op : detail::negate_cmp(op);
    ExprPtr lhs = strip(c->args[0]), rhs = strip(c->args[1]);

    // pointer null tests: p == NULL / p != NULL
    auto null_side = [&](const ExprPtr &e) {
      return e->kind == ExprKind::Null ||
             (e->kind == ExprKind::IntLit && e->int_val == 0);
    };
    if ((eff == BinOp::Eq || eff == BinOp::Ne) &&
        (null_side(lhs) || null_side(rhs))) {
      ExprPtr p = null_side(rhs) ? lhs : rhs;
      if (is_lvalue(p)) {
        bool want_null = eff == BinOp::Eq;
        refine_lvalue(p, [&](const AbstractValue &cur) {
          if (cur.kind != AbstractValue::Kind::Ptr) return cur;
          AbstractValue v = cur;
          if (want_null) {
            if (!v.may_null) return AbstractValue::bottom();
            v.ptrs.clear();
          } else {
            v.may_null = false;
            if (v.ptrs.empty()) return AbstractValue::bottom();
          }
          return v;
        });
        return out;
      }
    }

    for (int side = 0; side < 2; ++side) {
      ExprPtr var = side == 0 ? lhs : rhs;
      ExprPtr other = side == 0 ? rhs : lhs;
      if (!is_lvalue(var)) continue;
      AbstractValue ov = eval_expr(env, s, other);
      if (ov.kind != AbstractValue::Kind::Int) continue;
      BinOp o = side == 0 ? eff : detail::flip_cmp(eff);
      refine_lvalue(var, [&](const AbstractValue &cur) {
        if (cur.kind == AbstractValue::Kind::Ptr) return cur;
        Interval vi = cur.kind == AbstractValue::Kind::Int ? cur.iv : Interval::top();
        auto n = detail::narrow_by_cmp(vi, o, ov.iv);
        if (!n) return AbstractValue::bottom();
        return AbstractValue::of_interval(*n);
      });
      if (!out.reachable) return out;
      break;
    }
    return out;
  }
  case ExprKind::Var:
  case ExprKind::Deref:
  case ExprKind::Index: {
    refine_lvalue(c, [&](const AbstractValue &cur) -> AbstractValue {
      if (cur.kind == AbstractValue::Kind::Ptr) {
        AbstractValue v = cur;
        if (taken) v.may_null = false;
        else { v.ptrs.clear(); if (!v.may_null) return AbstractValue::bottom(); }
        if (taken && v.ptrs.empty()) return AbstractValue::bottom();
        return v;
      }
      if (cur.kind != AbstractValue::Kind::Int) return cur;
      if (!taken) {
        auto n = iv_meet(cur.iv, Interval::point(0));
        if (!n) return AbstractValue::bottom();
        return AbstractValue::of_interval(*n);
      }
      auto n = detail::iv_remove_point(cur.iv, 0);
      if (!n) return AbstractValue::bottom();
      return AbstractValue::of_interval(*n);
    });
    return out;
  }
  default: break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Memory accesses of a statement
// ---------------------------------------------------------------------------

struct MemAccess {
  Address addr;
  std::optional<long long> size;
  bool write = false;
  bool atomic = false;

  auto key() const { return std::tie(addr, write, atomic); }
  bool operator<(const MemAccess &o) const { return key() < o.key(); }
};

struct StmtAccesses {
  std::set<MemAccess> accesses;
  bool surely_invalid = false;
  bool unknown_target = false;

  void add(Address a, std::optional<long long> size, bool write, bool atomic = false) {
    accesses.insert({std::move(a), size, write, atomic});
  }
};

namespace detail {

inline void collect_expr_reads(const MemEnv &env, const AbstractState &s,
                               const ExprPtr &e, StmtAccesses &out);

// Reads needed to *compute the address* of an lvalue (not the cell itself).
inline void collect_addr_reads(const MemEnv &env, const AbstractState &s,
                               const ExprPtr &lv, StmtAccesses &out) {
  switch (lv->kind) {
  case ExprKind::Var: return;
  case ExprKind::Deref:
    collect_expr_reads(env, s, lv->args[0], out);
    return;
  case ExprKind::Index:
    if (!(lv->args[0]->kind == ExprKind::Var && lv->args[0]->type &&
          lv->args[0]->type->is_array()))
      collect_expr_reads(env, s, lv->args[0], out);
    collect_expr_reads(env, s, lv->args[1], out);
    return;
  default:
    collect_expr_reads(env, s, lv, out);
    return;
  }
}

inline void collect_expr_reads(const MemEnv &env, const AbstractState &s,
                               const ExprPtr &e, StmtAccesses &out) {
  if (!e) return;
  switch (e->kind) {
  case ExprKind::IntLit:
  case ExprKind::Null:
  case ExprKind::Nondet:
  case ExprKind::FuncRef:
    return;
  case ExprKind::Var:
    if (e->type && e->type->is_array()) return;  // decays, no load
    out.add({base_of_var(e), Interval::point(0)}, size_of(e->type), false);
    return;
  case ExprKind::AddrOf:
    collect_addr_reads(env, s, e->args[0], out);
    return;
  case ExprKind::Deref:
  case ExprKind::Index: {
    collect_addr_reads(env, s, e, out);
    LvalueResult lv = eval_lvalue(env, s, e);
    if (lv.surely_invalid) out.surely_invalid = true;
    if (lv.unknown_target) {
      out.unknown_target = true;
      out.add({Address{Base::unknown(), Interval::point(0)}}, {}, false);
    }
    for (auto &a : lv.addrs) out.add(a, size_of(e->type), false);
    return;
  }
  case ExprKind::Cast:
    collect_expr_reads(env, s, e->args[0], out);
    return;
  case ExprKind::Unary:
    collect_expr_reads(env, s, e->args[0], out);
    return;
  case ExprKind::Binary:
    collect_expr_reads(env, s, e->args[0], out);
    collect_expr_reads(env, s, e->args[1], out);
    return;
  }
}

inline void collect_lvalue_write(const MemEnv &env, const AbstractState &s,
                                 const ExprPtr &lv, StmtAccesses &out,
                                 bool atomic = false) {
  collect_addr_reads(env, s, lv, out);
  LvalueResult res = eval_lvalue(env, s, lv);
  if (res.surely_invalid) out.surely_invalid = true;
  if (res.unknown_target) {
    out.unknown_target = true;
    out.add({Address{Base::unknown(), Interval::point(0)}}, {}, true, atomic);
  }
  for (auto &a : res.addrs) out.add(a, size_of(lv->type), true, atomic);
}

} // namespace detail

/// All addresses read and written by executing `stmt` from state `s`,
/// evaluated with the abstract-interpreter semantics. If any involved
/// dereference is surely invalid, the whole statement reports no accesses.
inline StmtAccesses accesses_of_stmt(const MemEnv &env, const AbstractState &s,
                                     const Stmt &stmt) {
  StmtAccesses out;
  switch (stmt.kind) {
  case StmtKind::Assign:
  case StmtKind::NondetAssign:
    detail::collect_expr_reads(env, s, stmt.a, out);
    if (stmt.kind == StmtKind::NondetAssign)  // may keep the old value
      detail::collect_expr_reads(env, s, stmt.lhs, out);
    detail::collect_lvalue_write(env, s, stmt.lhs, out);
    break;
  case StmtKind::Alloc:
    detail::collect_expr_reads(env, s, stmt.a, out);
    detail::collect_lvalue_write(env, s, stmt.lhs, out);
    break;
  case StmtKind::Free:
  case StmtKind::Return:
  case StmtKind::If:
    if (stmt.a) detail::collect_expr_reads(env, s, stmt.a, out);
    break;
  case StmtKind::LoopHead:
  case StmtKind::While:
    break;
  case StmtKind::Call:
  case StmtKind::GuardedCall: {
    if (stmt.role == ConcRole::Lock || stmt.role == ConcRole::Unlock) {
      // lock operand reads are synchronization, not data accesses
      if (stmt.lhs) detail::collect_lvalue_write(env, s, stmt.lhs, out);
      break;
    }
    bool atomic = stmt.role == ConcRole::Atomic;
    for (auto &arg : stmt.args) detail::collect_expr_reads(env, s, arg, out);
    if (stmt.a && stmt.a->kind != ExprKind::FuncRef)
      detail::collect_expr_reads(env, s, stmt.a, out);
    if (atomic) {
      // atomic helpers read/write through their pointer arguments
      StmtAccesses tagged;
      tagged.surely_invalid = out.surely_invalid;
      tagged.unknown_target = out.unknown_target;
      for (auto a : out.accesses) {
        a.atomic = true;
        tagged.accesses.insert(a);
      }
      out = std::move(tagged);
      for (auto &arg : stmt.args) {
        AbstractValue v = eval_expr(env, s, arg);
        if (v.kind != AbstractValue::Kind::Ptr) continue;
        for (auto &t : v.ptrs) {
          if (t.base.kind == BaseKind::Func) continue;
          out.add(t, t.base.type ? std::optional(size_of(t.base.type)) : std::nullopt,
                  false, true);
          out.add(t, t.base.type ? std::optional(size_of(t.base.type)) : std::nullopt,
                  true, true);
        }
      }
    }
    if (stmt.role == ConcRole::Create && stmt.create_fn &&
        stmt.create_fn->id_pos >= 0) {
      // the create call stores the new thread id
      const ExprPtr &ide = stmt.args[stmt.create_fn->id_pos];
      AbstractValue v = eval_expr(env, s, ide);
      if (v.kind == AbstractValue::Kind::Ptr)
        for (auto &t : v.ptrs)
          if (t.base.kind != BaseKind::Func)
            out.add(t, size_of(ty_thread_id()), true);
    }
    if (stmt.lhs) detail::collect_lvalue_write(env, s, stmt.lhs, out);
    break;
  }
  }
  if (out.surely_invalid) return StmtAccesses{{}, true, out.unknown_target};
  return out;
}

// ---------------------------------------------------------------------------
// Transfer function (intraprocedural kinds; user calls are the backend's job)
// ---------------------------------------------------------------------------

struct StepResult {
  AbstractState fall = AbstractState::bottom();   // non-branching successor
  AbstractState taken = AbstractState::bottom();  // If: then branch
  AbstractState other = AbstractState::bottom();  // If: else branch
  bool surely_invalid = false;
};

/// Abstract post-state(s) of executing `stmt` from `s`. Handles every
/// statement kind except calls to user-defined functions, whose
/// interprocedural effect belongs to the backend driving the analysis.
inline StepResult transfer_stmt(const MemEnv &env, const AbstractState &s,
                                const Stmt &stmt) {
  StepResult r;
  if (!s.reachable) return r;
  switch (stmt.kind) {
  case StmtKind::Assign:
  case StmtKind::NondetAssign: {
    LvalueResult lv = eval_lvalue(env, s, stmt.lhs);
    if (lv.surely_invalid) {
      r.surely_invalid = true;
      return r;
    }
    AbstractValue v = eval_expr(env, s, stmt.a);
    r.fall = s;
    if (!lv.unknown_target)
      store(r.fall, lv.addrs, v, /*force_weak=*/stmt.kind == StmtKind::NondetAssign);
    return r;
  }
  case StmtKind::Alloc: {
    LvalueResult lv = eval_lvalue(env, s, stmt.lhs);
    if (lv.surely_invalid) {
      r.surely_invalid = true;
      return r;
    }
    bool weak = env.is_weak_site(stmt.id) || stmt.in_loop;
    std::optional<long long> sz;
    AbstractValue szv = eval_expr(env, s, stmt.a);
    if (szv.kind == AbstractValue::Kind::Int && szv.iv.is_singleton())
      sz = szv.iv.lo;
    Base dyn = Base::dynamic(stmt.id, weak, sz);
    r.fall = s;
    const AbstractValue *cell = r.fall.find(dyn);
    // fresh memory is uninitialized
    r.fall.set(dyn, cell && weak ? join_value(*cell, AbstractValue::top())
                                 : AbstractValue::top());
    AbstractValue p = AbstractValue::of_ptrs({{dyn, Interval::point(0)}},
                                             /*null_ok=*/true);
    if (!lv.unknown_target)
      store(r.fall, lv.addrs, p, /*force_weak=*/stmt.guarded_alloc);
    return r;
  }
  case StmtKind::Free:
  case StmtKind::LoopHead:
  case StmtKind::While:
  case StmtKind::Return:
    r.fall = s;
    return r;
  case StmtKind::If:
    r.taken = filter_state(env, s, stmt.a, true);
    r.other = filter_state(env, s, stmt.a, false);
    return r;
  case StmtKind::Call:
  case StmtKind::GuardedCall: {
    // Only the concurrency roles are interpreted here; plain calls fall to
    // the interprocedural driver.
    AbstractState post = s;
    auto assign_lhs = [&](AbstractValue v) {
      if (!stmt.lhs) return;
      LvalueResult lv = eval_lvalue(env, post, stmt.lhs);
      if (!lv.unknown_target && !lv.surely_invalid) store(post, lv.addrs, v);
    };
    switch (stmt.role) {
    case ConcRole::Create: {
      if (stmt.create_fn && stmt.create_fn->id_pos >= 0) {
        AbstractValue idp = eval_expr(env, post, stmt.args[stmt.create_fn->id_pos]);
        if (idp.kind == AbstractValue::Kind::Ptr)
          store(post, idp.ptrs, AbstractValue::top(),
                /*force_weak=*/idp.ptrs.size() > 1);
      }
      assign_lhs(AbstractValue::top());
      break;
    }
    case ConcRole::Join: {
      assign_lhs(AbstractValue::top());
      break;
    }
    case ConcRole::Lock: {
      bool blocking = stmt.lock_fn && stmt.lock_fn->blocking;
      assign_lhs(blocking ? AbstractValue::of_int(0) : AbstractValue::top());
      break;
    }
    case ConcRole::Unlock:
      assign_lhs(AbstractValue::of_int(0));
      break;
    case ConcRole::Atomic: {
      for (auto &arg : stmt.args) {
        AbstractValue v = eval_expr(env, post, arg);
        if (v.kind == AbstractValue::Kind::Ptr)
          store(post, v.ptrs, AbstractValue::top(), /*force_weak=*/true);
      }
      assign_lhs(AbstractValue::top());
      break;
    }
    case ConcRole::None:
      // unknown to this layer; caller must interpret
      assign_lhs(AbstractValue::top());
      break;
    }
    if (stmt.kind == StmtKind::GuardedCall) post = join_state(post, s);
    r.fall = post;
    return r;
  }
  }
  return r;
}

} // namespace racerlite
