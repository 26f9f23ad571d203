#pragma once

#include <memory>
#include <vector>

#include "racerlite/ir.hpp"

namespace racerlite {

namespace detail {

inline AstStmtMut clone_stmt(const AstStmt &s) {
  auto c = std::make_shared<AstStmt>(s);
  return c;
}

// Deep copy with fresh ids; copies remember the original statement.
inline AstStmtPtr copy_fresh(IRProgram &prog, const AstStmtPtr &s) {
  auto c = clone_stmt(*s);
  c->origin = s->origin == kNoStmt ? s->id : s->origin;
  c->id = prog.next_id++;
  std::vector<AstStmtPtr> body, orelse;
  for (auto &b : s->body) body.push_back(copy_fresh(prog, b));
  for (auto &b : s->orelse) orelse.push_back(copy_fresh(prog, b));
  c->body = std::move(body);
  c->orelse = std::move(orelse);
  return c;
}

inline std::vector<AstStmtPtr> unfold_in(IRProgram &prog,
                                         const std::vector<AstStmtPtr> &stmts, int k);

inline AstStmtPtr unfold_stmt(IRProgram &prog, const AstStmtPtr &s, int k,
                              std::vector<AstStmtPtr> &out) {
  switch (s->kind) {
  case StmtKind::If: {
    auto c = clone_stmt(*s);
    c->body = unfold_in(prog, s->body, k);
    c->orelse = unfold_in(prog, s->orelse, k);
    return c;
  }
  case StmtKind::While: {
    auto residual = clone_stmt(*s);
    residual->body = unfold_in(prog, s->body, k);
    // Peel k guarded copies ahead of the residual loop. Each peeled copy sits
    // under the loop guard, so behaviour is preserved exactly.
    std::vector<AstStmtPtr> peels;
    AstStmtPtr chain = residual;
    for (int i = 0; i < k; ++i) {
      auto guard = std::make_shared<AstStmt>();
      guard->kind = StmtKind::If;
      guard->id = prog.next_id++;
      guard->loc = s->loc;
      guard->a = s->a;
      guard->origin = s->origin == kNoStmt ? s->id : s->origin;
      std::vector<AstStmtPtr> body;
      for (auto &b : residual->body) body.push_back(copy_fresh(prog, b));
      body.push_back(chain);
      guard->body = std::move(body);
      chain = guard;
    }
    (void)peels;
    (void)out;
    return chain;
  }
  default:
    return s;
  }
}

inline std::vector<AstStmtPtr> unfold_in(IRProgram &prog,
                                         const std::vector<AstStmtPtr> &stmts, int k) {
  std::vector<AstStmtPtr> out;
  for (auto &s : stmts) out.push_back(unfold_stmt(prog, s, k, out));
  return out;
}

inline bool expr_has_by_ref_arg(const ExprPtr &e) {
  if (!e) return false;
  if (e->kind == ExprKind::AddrOf) return true;
  if (e->type && (e->type->is_pointer() || e->type->is_array())) return true;
  for (auto &a : e->args)
    if (expr_has_by_ref_arg(a)) return true;
  return false;
}

inline std::vector<AstStmtPtr> make_extensive_in(IRProgram &prog,
                                                 const std::vector<AstStmtPtr> &stmts) {
  std::vector<AstStmtPtr> out;
  for (auto &s : stmts) {
    switch (s->kind) {
    case StmtKind::Assign: {
      auto c = clone_stmt(*s);
      c->kind = StmtKind::NondetAssign;
      out.push_back(c);
      break;
    }
    case StmtKind::Alloc: {
      auto c = clone_stmt(*s);
      c->guarded_alloc = true;
      out.push_back(c);
      break;
    }
    case StmtKind::Call: {
      // Concurrency-role calls stay; their effects live in the dedicated
      // analyses, not in the value state.
      bool by_ref = false;
      for (auto &a : s->args)
        if (expr_has_by_ref_arg(a)) by_ref = true;
      if (s->role == ConcRole::None && by_ref) {
        auto c = clone_stmt(*s);
        c->kind = StmtKind::GuardedCall;
        out.push_back(c);
      } else {
        out.push_back(s);
      }
      break;
    }
    case StmtKind::If: {
      auto c = clone_stmt(*s);
      c->body = make_extensive_in(prog, s->body);
      c->orelse = make_extensive_in(prog, s->orelse);
      out.push_back(c);
      break;
    }
    case StmtKind::While: {
      auto c = clone_stmt(*s);
      c->body = make_extensive_in(prog, s->body);
      out.push_back(c);
      break;
    }
    default:
      out.push_back(s);
    }
  }
  return out;
}

inline bool has_empty_loop(const std::vector<AstStmtPtr> &stmts) {
  for (auto &s : stmts) {
    if (s->kind == StmtKind::While && s->body.empty()) return true;
    if (has_empty_loop(s->body) || has_empty_loop(s->orelse)) return true;
  }
  return false;
}

} // namespace detail

/// Peels each loop body k times ahead of the residual loop. Peeled statements
/// get fresh ids and carry the original id as provenance. k = 0 is the
/// identity.
inline IRProgram unfold_loops(const IRProgram &p, int k) {
  IRProgram out = p;
  if (k > 0) {
    for (auto &[name, fn] : out.functions)
      fn.ast = detail::unfold_in(out, fn.ast, k);
    out.unfold_count += k;
  }
  lower_cfg(out);
  return out;
}

/// Rewrites every instruction to be extensive: assignments become a
/// non-deterministic choice between old and new value, calls that take an
/// argument by reference may be skipped.
inline IRProgram make_extensive(const IRProgram &p) {
  IRProgram out = p;
  for (auto &[name, fn] : out.functions)
    fn.ast = detail::make_extensive_in(out, fn.ast);
  out.extensive = true;
  lower_cfg(out);
  return out;
}

/// Active-waiting heuristic: a loop whose body is empty is the
/// characteristic pattern of lock-free spinning, which is out of scope.
inline bool detect_active_waiting(const IRProgram &p) {
  for (auto &[name, fn] : p.functions)
    if (detail::has_empty_loop(fn.ast)) return true;
  return false;
}

} // namespace racerlite
