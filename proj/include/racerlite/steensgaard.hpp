#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "racerlite/absdomain.hpp"
#include "racerlite/ir.hpp"

namespace racerlite {

/// Steensgaard-style unification-based points-to analysis over Bases.
/// Each equivalence class has at most one points-to successor class;
/// assignments unify the successors.
class Steensgaard {
public:
  int node(const Base &b) {
    auto it = index_.find(b);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(parent_.size());
    parent_.push_back(id);
    pts_.push_back(-1);
    bases_.push_back(b);
    index_.emplace(b, id);
    return id;
  }

  int fresh() {
    int id = static_cast<int>(parent_.size());
    parent_.push_back(id);
    pts_.push_back(-1);
    bases_.push_back(std::nullopt);
    return id;
  }

  int find(int x) const {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unify(int a, int b) {
    std::deque<std::pair<int, int>> todo{{a, b}};
    while (!todo.empty()) {
      auto [x, y] = todo.front();
      todo.pop_front();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      int px = pts_[x], py = pts_[y];
      parent_[y] = x;
      if (px >= 0 && py >= 0) todo.push_back({px, py});
      else if (py >= 0) pts_[x] = py;
    }
  }

  int pts(int x) {
    x = find(x);
    if (pts_[x] < 0) pts_[x] = fresh();
    return find(pts_[x]);
  }

  bool has_pts(int x) const { return pts_[find(x)] >= 0; }

  /// All bases whose class is the points-to class of b's class.
  std::set<Base> points_to(const Base &b) const {
    auto it = index_.find(b);
    if (it == index_.end()) return {};
    int x = find(it->second);
    if (pts_[x] < 0) return {};
    int target = find(pts_[x]);
    return members(target);
  }

  std::set<Base> members(int cls) const {
    std::set<Base> out;
    for (size_t i = 0; i < bases_.size(); ++i)
      if (bases_[i] && find(static_cast<int>(i)) == cls) out.insert(*bases_[i]);
    return out;
  }

  std::set<Base> alias_class(const Base &b) const {
    auto it = index_.find(b);
    if (it == index_.end()) return {b};
    return members(find(it->second));
  }

  bool known(const Base &b) const { return index_.count(b) > 0; }

private:
  std::map<Base, int> index_;
  mutable std::vector<int> parent_;
  std::vector<int> pts_;
  std::vector<std::optional<Base>> bases_;
};

namespace detail {

// Node standing for the cells an lvalue denotes; -1 when unattributable.
inline int steens_loc(Steensgaard &uf, const ExprPtr &e) {
  switch (e->kind) {
  case ExprKind::Var: {
    Base b = e->scope == VarScope::Global ? Base::global(e->name, e->type)
             : e->scope == VarScope::Local
                 ? Base::local(e->owner, e->name, e->type)
                 : Base::formal(e->owner, e->name, e->type);
    return uf.node(b);
  }
  case ExprKind::Deref: {
    int v = steens_loc(uf, e->args[0]);
    return v < 0 ? -1 : uf.pts(v);
  }
  case ExprKind::Index: {
    const ExprPtr &arr = e->args[0];
    if (arr->kind == ExprKind::Var && arr->type && arr->type->is_array())
      return steens_loc(uf, arr);
    int v = steens_loc(uf, arr);
    return v < 0 ? -1 : uf.pts(v);
  }
  case ExprKind::Cast:
    return steens_loc(uf, e->args[0]);
  default:
    return -1;
  }
}

// Processes lhs := rhs.
inline void steens_assign(Steensgaard &uf, const ExprPtr &lhs, const ExprPtr &rhs) {
  int l = steens_loc(uf, lhs);
  if (l < 0 || !rhs) return;
  ExprPtr r = rhs;
  while (r->kind == ExprKind::Cast) r = r->args[0];
  switch (r->kind) {
  case ExprKind::AddrOf: {
    int t = steens_loc(uf, r->args[0]);
    if (t >= 0) uf.unify(uf.pts(l), t);
    return;
  }
  case ExprKind::FuncRef:
    uf.unify(uf.pts(l), uf.node(Base::function_base(r->name)));
    return;
  case ExprKind::Var:
  case ExprKind::Deref:
  case ExprKind::Index: {
    int v = steens_loc(uf, r);
    if (v >= 0) uf.unify(uf.pts(l), uf.pts(v));
    return;
  }
  case ExprKind::Binary: {
    // pointer arithmetic: aliases flow from the pointer operand
    steens_assign(uf, lhs, r->args[0]);
    steens_assign(uf, lhs, r->args[1]);
    return;
  }
  default:
    return;  // constants carry no aliases
  }
}

} // namespace detail

/// Runs the unification over the whole program once. Allocation statements
/// produce one base per site; calls bind formals and return values.
inline Steensgaard steensgaard_analyse(const IRProgram &prog) {
  Steensgaard uf;
  auto ret_base = [](const std::string &fn) {
    return Base::local(fn, "$ret", nullptr);
  };
  for (auto &[fname, fn] : prog.functions) {
    for (StmtId id : fn.order) {
      const Stmt &s = prog.stmt(id);
      switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::NondetAssign:
        detail::steens_assign(uf, s.lhs, s.a);
        break;
      case StmtKind::Alloc: {
        int l = detail::steens_loc(uf, s.lhs);
        if (l >= 0)
          uf.unify(uf.pts(l), uf.node(Base::dynamic(s.id, s.in_loop)));
        break;
      }
      case StmtKind::Call:
      case StmtKind::GuardedCall: {
        if (s.role != ConcRole::None) break;
        auto callee = direct_callee(s);
        if (!callee || !prog.functions.count(*callee)) break;
        const Function &f = prog.functions.at(*callee);
        for (size_t i = 0; i < f.formals.size() && i < s.args.size(); ++i) {
          ExprPtr formal = mk_var(f.formals[i].first, VarScope::Formal, *callee,
                                  f.formals[i].second);
          detail::steens_assign(uf, formal, s.args[i]);
        }
        if (s.lhs) {
          int l = detail::steens_loc(uf, s.lhs);
          if (l >= 0) uf.unify(uf.pts(l), uf.pts(uf.node(ret_base(*callee))));
        }
        break;
      }
      case StmtKind::Return:
        if (s.a) {
          ExprPtr rv = mk_var("$ret", VarScope::Local, s.func, nullptr);
          detail::steens_assign(uf, rv, s.a);
        }
        break;
      default:
        break;
      }
    }
  }
  return uf;
}

/// Unifies thread-argument bindings (formal, actual address) into the graph;
/// closure under the unification rules is immediate.
inline void steensgaard_saturate(Steensgaard &uf,
                                 const std::vector<std::pair<Base, Address>> &bindings) {
  for (auto &[formal, actual] : bindings)
    uf.unify(uf.pts(uf.node(formal)), uf.node(actual.base));
}

} // namespace racerlite
