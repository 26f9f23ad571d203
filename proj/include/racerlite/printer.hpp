#pragma once

#include <sstream>
#include <string>

#include "racerlite/ir.hpp"

namespace racerlite {

namespace detail {

inline int bin_prec(BinOp op) {
  switch (op) {
  case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 5;
  case BinOp::Add: case BinOp::Sub: return 4;
  case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 3;
  case BinOp::Eq: case BinOp::Ne: return 2;
  case BinOp::LAnd: return 1;
  case BinOp::LOr: return 0;
  }
  return 0;
}

inline const char *bin_op_str(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Div: return "/";
  case BinOp::Mod: return "%";
  case BinOp::Eq: return "==";
  case BinOp::Ne: return "!=";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::LAnd: return "&&";
  case BinOp::LOr: return "||";
  }
  return "?";
}

inline void print_expr(std::ostream &os, const ExprPtr &e, int parent_prec = -1) {
  if (!e) { os << "/*null*/"; return; }
  switch (e->kind) {
  case ExprKind::IntLit: os << e->int_val; return;
  case ExprKind::Null: os << "NULL"; return;
  case ExprKind::Nondet: os << "(*)"; return;
  case ExprKind::Var: os << e->name; return;
  case ExprKind::FuncRef: os << e->name; return;
  case ExprKind::Unary:
    os << (e->un_op == UnOp::Neg ? "-" : "!");
    os << "(";
    print_expr(os, e->args[0]);
    os << ")";
    return;
  case ExprKind::Binary: {
    int p = bin_prec(e->bin_op);
    bool paren = parent_prec >= 0 && p < parent_prec;
    if (paren) os << "(";
    print_expr(os, e->args[0], p);
    os << " " << bin_op_str(e->bin_op) << " ";
    print_expr(os, e->args[1], p + 1);
    if (paren) os << ")";
    return;
  }
  case ExprKind::AddrOf:
    os << "&";
    print_expr(os, e->args[0], 100);
    return;
  case ExprKind::Deref:
    os << "*";
    if (e->args[0]->kind == ExprKind::Var || e->args[0]->kind == ExprKind::FuncRef)
      print_expr(os, e->args[0], 100);
    else {
      os << "(";
      print_expr(os, e->args[0]);
      os << ")";
    }
    return;
  case ExprKind::Index:
    print_expr(os, e->args[0], 100);
    os << "[";
    print_expr(os, e->args[1]);
    os << "]";
    return;
  case ExprKind::Cast:
    os << "(" << type_str(e->cast_type) << ")";
    print_expr(os, e->args[0], 100);
    return;
  }
}

inline std::string decl_str(const TypePtr &t, const std::string &name) {
  if (t && t->is_array())
    return type_str(t->elem) + " " + name + "[" + std::to_string(t->array_len) + "]";
  if (t && t->is_pointer() && t->elem && t->elem->kind == TypeKind::Func) {
    std::string s = type_str(t->elem->elem) + " (*" + name + ")(";
    for (int i = 0; i < t->elem->func_arity; ++i)
      s += std::string(i ? ", " : "") + "void *";
    return s + ")";
  }
  return type_str(t) + " " + name;
}

inline void print_stmt(std::ostream &os, const AstStmtPtr &s, int indent) {
  std::string pad(indent * 2, ' ');
  switch (s->kind) {
  case StmtKind::Assign:
    os << pad;
    print_expr(os, s->lhs);
    os << " = ";
    print_expr(os, s->a);
    os << ";\n";
    return;
  case StmtKind::NondetAssign:
    os << pad;
    print_expr(os, s->lhs);
    os << " = (*) ? ";
    print_expr(os, s->lhs);
    os << " : ";
    print_expr(os, s->a);
    os << ";\n";
    return;
  case StmtKind::Alloc:
    os << pad;
    if (s->guarded_alloc) os << "/*if(*)*/ ";
    print_expr(os, s->lhs);
    os << " = malloc(";
    print_expr(os, s->a);
    os << ");\n";
    return;
  case StmtKind::Free:
    os << pad << "free(";
    print_expr(os, s->a);
    os << ");\n";
    return;
  case StmtKind::Call:
  case StmtKind::GuardedCall: {
    os << pad;
    if (s->kind == StmtKind::GuardedCall) os << "if (*) ";
    if (s->lhs) {
      print_expr(os, s->lhs);
      os << " = ";
    }
    print_expr(os, s->a);
    os << "(";
    for (size_t i = 0; i < s->args.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, s->args[i]);
    }
    os << ");\n";
    return;
  }
  case StmtKind::If:
    os << pad << "if (";
    print_expr(os, s->a);
    os << ") {\n";
    for (auto &c : s->body) print_stmt(os, c, indent + 1);
    os << pad << "}";
    if (!s->orelse.empty()) {
      os << " else {\n";
      for (auto &c : s->orelse) print_stmt(os, c, indent + 1);
      os << pad << "}";
    }
    os << "\n";
    return;
  case StmtKind::While:
    os << pad << "while (";
    print_expr(os, s->a);
    os << ") {\n";
    for (auto &c : s->body) print_stmt(os, c, indent + 1);
    os << pad << "}\n";
    return;
  case StmtKind::Return:
    os << pad << "return";
    if (s->a) {
      os << " ";
      print_expr(os, s->a);
    }
    os << ";\n";
    return;
  default:
    os << pad << "/* ? */\n";
    return;
  }
}

} // namespace detail

inline std::string expr_to_string(const ExprPtr &e) {
  std::ostringstream os;
  detail::print_expr(os, e);
  return os.str();
}

/// Prints the program back as source text. Re-parsing the output yields an
/// isomorphic IR as long as the extensivity transform has not been applied
/// (NondetAssign/GuardedCall have no surface syntax).
inline std::string print_program(const IRProgram &prog) {
  std::ostringstream os;
  for (auto &g : prog.globals) {
    if (g.atomic) os << "atomic ";
    if (g.thread_local_q) os << "thread_local ";
    os << detail::decl_str(g.type, g.name);
    if (g.init) {
      os << " = ";
      detail::print_expr(os, g.init);
    }
    os << ";\n";
  }
  for (auto &[name, fn] : prog.functions) {
    os << "\n" << type_str(fn.ret) << " " << name << "(";
    for (size_t i = 0; i < fn.formals.size(); ++i) {
      if (i) os << ", ";
      os << detail::decl_str(fn.formals[i].second, fn.formals[i].first);
    }
    os << ") {\n";
    for (auto &[ln, ld] : fn.locals) {
      os << "  ";
      if (ld.atomic) os << "atomic ";
      os << detail::decl_str(ld.type, ln) << ";\n";
    }
    for (auto &s : fn.ast) detail::print_stmt(os, s, 1);
    os << "}\n";
  }
  return os.str();
}

/// One line per CFG statement; used by dumps and debugging.
inline std::string stmt_to_string(const Stmt &s) {
  std::ostringstream os;
  switch (s.kind) {
  case StmtKind::Assign:
    detail::print_expr(os, s.lhs); os << " = "; detail::print_expr(os, s.a); break;
  case StmtKind::NondetAssign:
    detail::print_expr(os, s.lhs); os << " = (*) ? ";
    detail::print_expr(os, s.lhs); os << " : "; detail::print_expr(os, s.a); break;
  case StmtKind::Call:
  case StmtKind::GuardedCall:
    if (s.kind == StmtKind::GuardedCall) os << "if (*) ";
    if (s.lhs) { detail::print_expr(os, s.lhs); os << " = "; }
    detail::print_expr(os, s.a);
    os << "(";
    for (size_t i = 0; i < s.args.size(); ++i) {
      if (i) os << ", ";
      detail::print_expr(os, s.args[i]);
    }
    os << ")";
    break;
  case StmtKind::If: os << "if ("; detail::print_expr(os, s.a); os << ")"; break;
  case StmtKind::LoopHead: os << "loop"; break;
  case StmtKind::Return:
    os << "return";
    if (s.a) { os << " "; detail::print_expr(os, s.a); }
    break;
  case StmtKind::Alloc:
    detail::print_expr(os, s.lhs); os << " = malloc(";
    detail::print_expr(os, s.a); os << ")";
    if (s.guarded_alloc) os << " /*guarded*/";
    break;
  case StmtKind::Free: os << "free("; detail::print_expr(os, s.a); os << ")"; break;
  case StmtKind::While: os << "while"; break;
  }
  return os.str();
}

} // namespace racerlite
