#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "racerlite/config.hpp"
#include "racerlite/diag.hpp"
#include "racerlite/types.hpp"

namespace racerlite {

using StmtId = std::uint32_t;
inline constexpr StmtId kNoStmt = 0;

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
  IntLit,   // int_val
  Null,     // NULL / (void*)0
  Nondet,   // (*) non-deterministic int
  Var,      // name, scope, owner
  FuncRef,  // name of a function used as a value
  Unary,    // un_op, args[0]
  Binary,   // bin_op, args[0], args[1]
  AddrOf,   // args[0] (lvalue)
  Deref,    // args[0]
  Index,    // args[0][args[1]]
  Cast,     // (cast_type) args[0]
};

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, LAnd, LOr };

enum class VarScope { Global, Local, Formal };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  long long int_val = 0;
  std::string name;          // Var / FuncRef
  VarScope scope = VarScope::Global;
  std::string owner;         // enclosing function for Local/Formal vars
  UnOp un_op = UnOp::Neg;
  BinOp bin_op = BinOp::Add;
  std::vector<ExprPtr> args;
  TypePtr type;              // filled during parsing
  TypePtr cast_type;
  SourceLoc loc;
};

inline ExprPtr mk_int(long long v, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntLit;
  e->int_val = v;
  e->type = ty_int();
  e->loc = loc;
  return e;
}

inline ExprPtr mk_null(SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Null;
  e->type = ty_void_ptr();
  e->loc = loc;
  return e;
}

inline ExprPtr mk_nondet(SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Nondet;
  e->type = ty_int();
  e->loc = loc;
  return e;
}

inline ExprPtr mk_var(std::string name, VarScope scope, std::string owner,
                      TypePtr type, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = std::move(name);
  e->scope = scope;
  e->owner = std::move(owner);
  e->type = std::move(type);
  e->loc = loc;
  return e;
}

inline ExprPtr mk_func_ref(std::string name, TypePtr type, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::FuncRef;
  e->name = std::move(name);
  e->type = std::move(type);
  e->loc = loc;
  return e;
}

inline ExprPtr mk_unary(UnOp op, ExprPtr sub, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Unary;
  e->un_op = op;
  e->type = ty_int();
  e->args = {std::move(sub)};
  e->loc = loc;
  return e;
}

inline ExprPtr mk_binary(BinOp op, ExprPtr l, ExprPtr r, TypePtr type,
                         SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->bin_op = op;
  e->args = {std::move(l), std::move(r)};
  e->type = std::move(type);
  e->loc = loc;
  return e;
}

inline ExprPtr mk_addr_of(ExprPtr sub, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::AddrOf;
  e->type = sub->type ? ty_ptr(sub->type) : ty_void_ptr();
  e->args = {std::move(sub)};
  e->loc = loc;
  return e;
}

inline ExprPtr mk_deref(ExprPtr sub, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Deref;
  e->type = sub->type && sub->type->elem ? sub->type->elem : ty_int();
  e->args = {std::move(sub)};
  e->loc = loc;
  return e;
}

inline ExprPtr mk_index(ExprPtr base, ExprPtr idx, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Index;
  e->type = base->type && base->type->elem ? base->type->elem : ty_int();
  e->args = {std::move(base), std::move(idx)};
  e->loc = loc;
  return e;
}

inline ExprPtr mk_cast(TypePtr to, ExprPtr sub, SourceLoc loc = {}) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Cast;
  e->cast_type = to;
  e->type = std::move(to);
  e->args = {std::move(sub)};
  e->loc = loc;
  return e;
}

/// Structural equality, ignoring locations and types. Var leaves compare by
/// resolved declaration (scope + owner + name).
inline bool expr_equal(const ExprPtr &a, const ExprPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case ExprKind::IntLit: return a->int_val == b->int_val;
  case ExprKind::Null:
  case ExprKind::Nondet: return true;
  case ExprKind::Var:
    return a->name == b->name && a->scope == b->scope && a->owner == b->owner;
  case ExprKind::FuncRef: return a->name == b->name;
  case ExprKind::Unary:
    if (a->un_op != b->un_op) return false;
    break;
  case ExprKind::Binary:
    if (a->bin_op != b->bin_op) return false;
    break;
  case ExprKind::Cast:
    if (!type_equal(a->cast_type, b->cast_type)) return false;
    break;
  default: break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  return true;
}

inline void for_each_subexpr(const ExprPtr &e,
                             const std::function<void(const ExprPtr &)> &fn) {
  if (!e) return;
  fn(e);
  for (auto &a : e->args) for_each_subexpr(a, fn);
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class StmtKind {
  Assign,        // lhs = a
  NondetAssign,  // lhs = (*) ? lhs : a        (only after make_extensive)
  Call,          // [lhs =] a(args)
  GuardedCall,   // if (*) [lhs =] a(args)     (only after make_extensive)
  If,            // if (a) ...                  AST node; reused as CFG guard
  While,         // while (a) ...               AST only
  LoopHead,      // CFG marker for a While; widening point
  Return,        // return a?
  Alloc,         // lhs = malloc(a)
  Free,          // free(a)
};

enum class ConcRole { None, Create, Join, Lock, Unlock, Atomic };

struct AstStmt;
using AstStmtPtr = std::shared_ptr<const AstStmt>;

struct AstStmt {
  StmtKind kind = StmtKind::Assign;
  StmtId id = kNoStmt;
  SourceLoc loc;
  ExprPtr lhs;  // Assign/NondetAssign/Alloc target; optional Call result
  ExprPtr a;    // rhs / cond / return expr / callee / size / freed ptr
  std::vector<ExprPtr> args;      // Call arguments
  std::vector<AstStmtPtr> body;   // If-then / While body
  std::vector<AstStmtPtr> orelse; // If-else
  ConcRole role = ConcRole::None;
  std::optional<CreateFn> create_fn;
  std::optional<JoinFn> join_fn;
  std::optional<LockFn> lock_fn;
  std::optional<UnlockFn> unlock_fn;
  StmtId origin = kNoStmt;    // original id for peeled loop copies
  bool guarded_alloc = false; // Alloc wrapped by make_extensive
};

using AstStmtMut = std::shared_ptr<AstStmt>;

// Flat CFG statement stored in the program-wide statement table.
struct Stmt {
  StmtId id = kNoStmt;
  StmtKind kind = StmtKind::Assign;
  SourceLoc loc;
  std::string func;
  ExprPtr lhs;
  ExprPtr a;
  std::vector<ExprPtr> args;
  ConcRole role = ConcRole::None;
  std::optional<CreateFn> create_fn;
  std::optional<JoinFn> join_fn;
  std::optional<LockFn> lock_fn;
  std::optional<UnlockFn> unlock_fn;
  StmtId origin = kNoStmt;
  bool in_loop = false;
  bool guarded_alloc = false;

  bool is_call() const {
    return kind == StmtKind::Call || kind == StmtKind::GuardedCall;
  }
};

enum class EdgeKind { Fall, Then, Else };

struct Edge {
  StmtId target = kNoStmt;
  EdgeKind kind = EdgeKind::Fall;
};

struct LocalDecl {
  TypePtr type;
  bool atomic = false;
  SourceLoc loc;
};

struct Function {
  std::string name;
  TypePtr ret;
  std::vector<std::pair<std::string, TypePtr>> formals;
  std::map<std::string, LocalDecl> locals;
  std::vector<AstStmtPtr> ast;

  // CFG, rebuilt by lower_cfg after any transform.
  StmtId entry = kNoStmt;
  std::vector<StmtId> exits;
  std::map<StmtId, std::vector<Edge>> succ;
  std::vector<StmtId> order;  // reverse-postorder-ish layout order

  const TypePtr *formal_type(const std::string &n) const {
    for (auto &f : formals)
      if (f.first == n) return &f.second;
    return nullptr;
  }
};

struct GlobalDecl {
  std::string name;
  TypePtr type;
  ExprPtr init;  // may be null (zero-initialized)
  bool atomic = false;
  bool thread_local_q = false;
  SourceLoc loc;
};

struct IRProgram {
  std::map<std::string, Function> functions;
  std::vector<GlobalDecl> globals;
  std::map<StmtId, Stmt> table;
  ConcurrencyConfig config;
  StmtId next_id = 1;
  bool extensive = false;
  int unfold_count = 0;

  const GlobalDecl *find_global(const std::string &n) const {
    for (auto &g : globals)
      if (g.name == n) return &g;
    return nullptr;
  }
  const Stmt &stmt(StmtId id) const { return table.at(id); }
};

// ---------------------------------------------------------------------------
// CFG lowering
// ---------------------------------------------------------------------------

namespace detail {

struct Lowering {
  IRProgram &prog;
  Function &fn;
  int loop_depth = 0;

  Stmt make_node(const AstStmt &s, StmtKind kind) {
    Stmt n;
    n.id = s.id;
    n.kind = kind;
    n.loc = s.loc;
    n.func = fn.name;
    n.lhs = s.lhs;
    n.a = s.a;
    n.args = s.args;
    n.role = s.role;
    n.create_fn = s.create_fn;
    n.join_fn = s.join_fn;
    n.lock_fn = s.lock_fn;
    n.unlock_fn = s.unlock_fn;
    n.origin = s.origin == kNoStmt ? s.id : s.origin;
    n.in_loop = loop_depth > 0;
    n.guarded_alloc = s.guarded_alloc;
    return n;
  }

  void add(Stmt n) {
    fn.order.push_back(n.id);
    prog.table.emplace(n.id, std::move(n));
  }

  void link(StmtId from, StmtId to, EdgeKind k) {
    fn.succ[from].push_back({to, k});
  }

  // Lowers a statement list; wires every dangling (stmt, edge-kind) pair in
  // `incoming` to the first emitted node. Returns the dangling exits.
  using Dangling = std::vector<std::pair<StmtId, EdgeKind>>;

  Dangling lower_seq(const std::vector<AstStmtPtr> &stmts, Dangling incoming) {
    for (auto &sp : stmts) {
      if (incoming.empty()) break;  // unreachable tail after return
      incoming = lower_stmt(*sp, std::move(incoming));
    }
    return incoming;
  }

  Dangling lower_stmt(const AstStmt &s, Dangling incoming) {
    auto attach = [&](StmtId id) {
      for (auto &[from, k] : incoming) {
        if (from == kNoStmt)
          fn.entry = id;
        else
          link(from, id, k);
      }
    };
    switch (s.kind) {
    case StmtKind::If: {
      add(make_node(s, StmtKind::If));
      attach(s.id);
      Dangling out = lower_seq(s.body, {{s.id, EdgeKind::Then}});
      Dangling out2 = lower_seq(s.orelse, {{s.id, EdgeKind::Else}});
      out.insert(out.end(), out2.begin(), out2.end());
      return out;
    }
    case StmtKind::While: {
      // LoopHead marker (the While node id) -> guard If (fresh id).
      Stmt head = make_node(s, StmtKind::LoopHead);
      head.a = nullptr;
      add(std::move(head));
      attach(s.id);
      AstStmt guard;
      guard.kind = StmtKind::If;
      guard.id = prog.next_id++;
      guard.loc = s.loc;
      guard.a = s.a;
      guard.origin = s.origin == kNoStmt ? s.id : s.origin;
      Stmt g = make_node(guard, StmtKind::If);
      add(std::move(g));
      link(s.id, guard.id, EdgeKind::Fall);
      ++loop_depth;
      Dangling body_out = lower_seq(s.body, {{guard.id, EdgeKind::Then}});
      --loop_depth;
      for (auto &[from, k] : body_out) link(from, s.id, k);  // back edges
      return {{guard.id, EdgeKind::Else}};
    }
    case StmtKind::Return: {
      add(make_node(s, StmtKind::Return));
      attach(s.id);
      fn.exits.push_back(s.id);
      return {};
    }
    default: {
      add(make_node(s, s.kind));
      attach(s.id);
      return {{s.id, EdgeKind::Fall}};
    }
    }
  }
};

} // namespace detail

/// (Re)builds per-function CFGs and the statement table from the ASTs.
/// Functions that can fall off the end get a synthesized `return`.
inline void lower_cfg(IRProgram &prog) {
  prog.table.clear();
  for (auto &[name, fn] : prog.functions) {
    fn.entry = kNoStmt;
    fn.exits.clear();
    fn.succ.clear();
    fn.order.clear();
    detail::Lowering low{prog, fn};
    auto dangling = low.lower_seq(fn.ast, {{kNoStmt, EdgeKind::Fall}});
    if (!dangling.empty() || fn.ast.empty()) {
      AstStmt ret;
      ret.kind = StmtKind::Return;
      ret.id = prog.next_id++;
      ret.loc = fn.ast.empty() ? SourceLoc{} : fn.ast.back()->loc;
      Stmt n = low.make_node(ret, StmtKind::Return);
      low.add(std::move(n));
      for (auto &[from, k] : dangling) {
        if (from == kNoStmt)
          fn.entry = ret.id;
        else
          fn.succ[from].push_back({ret.id, k});
      }
      if (fn.entry == kNoStmt && fn.ast.empty()) fn.entry = ret.id;
      fn.exits.push_back(ret.id);
    }
  }
}

/// Call targets that are statically known (direct calls by name).
inline std::optional<std::string> direct_callee(const Stmt &s) {
  if (!s.is_call() || !s.a) return std::nullopt;
  if (s.a->kind == ExprKind::FuncRef) return s.a->name;
  return std::nullopt;
}

} // namespace racerlite
