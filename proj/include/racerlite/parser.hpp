#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "racerlite/ir.hpp"
#include "racerlite/lexer.hpp"

namespace racerlite {

struct SourceFile {
  std::string path;
  std::string text;
};

struct SourceProgram {
  std::vector<SourceFile> files;
  ConcurrencyConfig concurrency = default_concurrency_config();
};

namespace detail {

class Parser {
public:
  Parser(IRProgram &prog) : prog_(prog) {}

  void run(const std::vector<SourceFile> &files) {
    for (auto &f : files) scan_signatures(tokenize(f.text, f.path));
    for (auto &f : files) parse_file(tokenize(f.text, f.path));
  }

private:
  IRProgram &prog_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Function *cur_fn_ = nullptr;

  const Token &tok(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token &eat() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(Tok k) const { return tok().kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    eat();
    return true;
  }
  const Token &expect(Tok k, const char *what) {
    if (!at(k)) throw FrontendError(tok().loc, std::string("expected ") + what);
    return eat();
  }

  static bool is_type_start(Tok k) {
    switch (k) {
    case Tok::KwInt: case Tok::KwVoid: case Tok::KwMutexT: case Tok::KwRwlockT:
    case Tok::KwThreadT: case Tok::KwAtomic: case Tok::KwThreadLocal:
      return true;
    default: return false;
    }
  }

  struct Quals {
    bool atomic = false;
    bool thread_local_q = false;
  };

  Quals parse_quals() {
    Quals q;
    for (;;) {
      if (accept(Tok::KwAtomic)) q.atomic = true;
      else if (accept(Tok::KwThreadLocal)) q.thread_local_q = true;
      else break;
    }
    return q;
  }

  TypePtr parse_base_type(Quals &q) {
    const Token &t = tok();
    if (t.kind == Tok::Ident && t.text == "atomic_int") {
      eat();
      q.atomic = true;
      return ty_int();
    }
    switch (t.kind) {
    case Tok::KwInt: eat(); return ty_int();
    case Tok::KwVoid: eat(); return ty_void();
    case Tok::KwMutexT: eat(); return ty_mutex();
    case Tok::KwRwlockT: eat(); return ty_rwlock();
    case Tok::KwThreadT: eat(); return ty_thread_id();
    default:
      throw FrontendError(t.loc, "expected type");
    }
  }

  // C-style declarator: stars, then name or (declarator), then [N] / (params)
  // suffixes. Good enough for `void *(*fp)(void *)` and `int a[10]`.
  struct Declarator {
    std::string name;
    TypePtr type;
    SourceLoc loc;
    bool is_function = false;  // outermost suffix is a parameter list
    std::vector<std::pair<std::string, TypePtr>> params;
  };

  Declarator parse_declarator(TypePtr base, bool allow_params) {
    int stars = 0;
    while (accept(Tok::Star)) ++stars;
    TypePtr inner_base;
    Declarator d;
    bool parenthesized = false;
    if (at(Tok::LParen) && (tok(1).kind == Tok::Star || tok(1).kind == Tok::Ident)) {
      // Could be `(*name)` nesting; only treat as nested declarator when it
      // parses as one (function-pointer form).
      if (tok(1).kind == Tok::Star) {
        eat();  // (
        parenthesized = true;
        int inner_stars = 0;
        while (accept(Tok::Star)) ++inner_stars;
        const Token &nm = expect(Tok::Ident, "identifier");
        d.name = nm.text;
        d.loc = nm.loc;
        expect(Tok::RParen, "')'");
        // Suffix applies to the inner declarator.
        if (at(Tok::LParen)) {
          auto params = parse_param_list();
          TypePtr ret = base;
          for (int k = 0; k < stars; ++k) ret = ty_ptr(ret);
          TypePtr fn = ty_func(ret, static_cast<int>(params.size()));
          TypePtr t = fn;
          for (int k = 0; k < inner_stars - 1; ++k) t = ty_ptr(t);
          d.type = ty_ptr(t);
          // pointer-to-function; collapse extra stars conservatively
          d.type = inner_stars >= 1 ? ty_ptr(fn) : fn;
          return d;
        }
        throw FrontendError(tok().loc, "expected '(' in function pointer declarator");
      }
    }
    (void)parenthesized;
    (void)inner_base;
    const Token &nm = expect(Tok::Ident, "identifier");
    d.name = nm.text;
    d.loc = nm.loc;
    TypePtr t = base;
    for (int k = 0; k < stars; ++k) t = ty_ptr(t);
    if (at(Tok::LParen) && allow_params) {
      d.is_function = true;
      d.params = parse_param_list();
      d.type = t;  // return type
      return d;
    }
    while (accept(Tok::LBracket)) {
      const Token &n = expect(Tok::Int, "array length");
      expect(Tok::RBracket, "']'");
      t = ty_array(t, static_cast<int>(n.int_val));
    }
    d.type = t;
    return d;
  }

  std::vector<std::pair<std::string, TypePtr>> parse_param_list() {
    expect(Tok::LParen, "'('");
    std::vector<std::pair<std::string, TypePtr>> params;
    if (accept(Tok::RParen)) return params;
    if (at(Tok::KwVoid) && tok(1).kind == Tok::RParen) {
      eat();
      eat();
      return params;
    }
    for (;;) {
      Quals q;
      TypePtr base = parse_base_type(q);
      if (at(Tok::RParen) || at(Tok::Comma)) {
        // unnamed parameter, e.g. (void *)
        int stars = 0;
        (void)stars;
        params.push_back({"", base});
      } else if (at(Tok::Star) && (tok(1).kind == Tok::RParen || tok(1).kind == Tok::Comma)) {
        eat();
        params.push_back({"", ty_ptr(base)});
      } else {
        Declarator d = parse_declarator(base, false);
        params.push_back({d.name, d.type});
      }
      if (accept(Tok::RParen)) break;
      expect(Tok::Comma, "',' in parameter list");
    }
    return params;
  }

  // -- pass 1: signatures ---------------------------------------------------

  void scan_signatures(std::vector<Token> toks) {
    toks_ = std::move(toks);
    pos_ = 0;
    while (!at(Tok::End)) {
      Quals q = parse_quals();
      TypePtr base = parse_base_type(q);
      Declarator d = parse_declarator(base, true);
      if (d.is_function) {
        if (prog_.functions.count(d.name)) {
          if (d.name == "main")
            throw FrontendError(d.loc, "multiple definitions of 'main'");
          throw FrontendError(d.loc, "redefinition of function '" + d.name + "'");
        }
        Function fn;
        fn.name = d.name;
        fn.ret = d.type;
        fn.formals = d.params;
        prog_.functions.emplace(d.name, std::move(fn));
        skip_braced_block();
      } else {
        GlobalDecl g;
        g.name = d.name;
        g.type = d.type;
        g.atomic = q.atomic;
        g.thread_local_q = q.thread_local_q;
        g.loc = d.loc;
        if (prog_.find_global(d.name))
          throw FrontendError(d.loc, "redefinition of global '" + d.name + "'");
        prog_.globals.push_back(std::move(g));
        // skip optional initializer
        if (accept(Tok::Assign)) {
          int depth = 0;
          while (!(at(Tok::Semi) && depth == 0)) {
            if (at(Tok::LParen)) ++depth;
            if (at(Tok::RParen)) --depth;
            if (at(Tok::End)) throw FrontendError(tok().loc, "expected ';'");
            eat();
          }
        }
        expect(Tok::Semi, "';'");
      }
    }
  }

  void skip_braced_block() {
    expect(Tok::LBrace, "'{'");
    int depth = 1;
    while (depth > 0) {
      if (at(Tok::End)) throw FrontendError(tok().loc, "unterminated function body");
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) --depth;
      eat();
    }
  }

  // -- pass 2: bodies --------------------------------------------------------

  void parse_file(std::vector<Token> toks) {
    toks_ = std::move(toks);
    pos_ = 0;
    while (!at(Tok::End)) {
      Quals q = parse_quals();
      TypePtr base = parse_base_type(q);
      Declarator d = parse_declarator(base, true);
      if (d.is_function) {
        cur_fn_ = &prog_.functions.at(d.name);
        cur_fn_->ast = parse_block();
        cur_fn_ = nullptr;
      } else {
        // global initializer, validated now
        GlobalDecl *g = nullptr;
        for (auto &gd : prog_.globals)
          if (gd.name == d.name) g = &gd;
        if (accept(Tok::Assign)) {
          ExprPtr init = parse_expr();
          check_const_init(init);
          g->init = init;
        }
        expect(Tok::Semi, "';'");
      }
    }
  }

  void check_const_init(const ExprPtr &e) {
    for_each_subexpr(e, [](const ExprPtr &s) {
      switch (s->kind) {
      case ExprKind::IntLit:
      case ExprKind::Null:
      case ExprKind::Unary:
      case ExprKind::Binary:
      case ExprKind::Cast:
        return;
      default:
        throw FrontendError(s->loc, "global initializer must be a constant");
      }
    });
  }

  std::vector<AstStmtPtr> parse_block() {
    expect(Tok::LBrace, "'{'");
    std::vector<AstStmtPtr> out;
    while (!accept(Tok::RBrace)) {
      if (at(Tok::End)) throw FrontendError(tok().loc, "expected '}'");
      parse_stmt_into(out);
    }
    return out;
  }

  AstStmtMut new_stmt(StmtKind kind, SourceLoc loc) {
    auto s = std::make_shared<AstStmt>();
    s->kind = kind;
    s->id = prog_.next_id++;
    s->loc = loc;
    return s;
  }

  void parse_stmt_into(std::vector<AstStmtPtr> &out) {
    SourceLoc loc = tok().loc;
    if (accept(Tok::Semi)) return;  // empty statement
    if (at(Tok::LBrace)) {
      auto inner = parse_block();
      out.insert(out.end(), inner.begin(), inner.end());
      return;
    }
    if (at(Tok::KwIf)) {
      eat();
      expect(Tok::LParen, "'('");
      ExprPtr cond = parse_expr();
      require_scalar(cond, "if condition");
      expect(Tok::RParen, "')'");
      auto s = new_stmt(StmtKind::If, loc);
      s->a = cond;
      std::vector<AstStmtPtr> then_body;
      parse_stmt_into(then_body);
      s->body = std::move(then_body);
      if (accept(Tok::KwElse)) {
        std::vector<AstStmtPtr> else_body;
        parse_stmt_into(else_body);
        s->orelse = std::move(else_body);
      }
      out.push_back(s);
      return;
    }
    if (at(Tok::KwWhile)) {
      eat();
      expect(Tok::LParen, "'('");
      ExprPtr cond = parse_expr();
      require_scalar(cond, "while condition");
      expect(Tok::RParen, "')'");
      auto s = new_stmt(StmtKind::While, loc);
      s->a = cond;
      std::vector<AstStmtPtr> body;
      parse_stmt_into(body);
      s->body = std::move(body);
      out.push_back(s);
      return;
    }
    if (at(Tok::KwFor)) {
      // for (init; cond; step) body  ==>  init; while (cond) { body; step; }
      eat();
      expect(Tok::LParen, "'('");
      if (!at(Tok::Semi)) {
        if (is_type_start(tok().kind)) parse_local_decl(out);
        else parse_simple_into(out);
      }
      expect(Tok::Semi, "';'");
      ExprPtr cond = at(Tok::Semi) ? mk_int(1, loc) : parse_expr();
      expect(Tok::Semi, "';'");
      std::vector<AstStmtPtr> step;
      if (!at(Tok::RParen)) parse_simple_into(step);
      expect(Tok::RParen, "')'");
      auto s = new_stmt(StmtKind::While, loc);
      s->a = cond;
      std::vector<AstStmtPtr> body;
      parse_stmt_into(body);
      body.insert(body.end(), step.begin(), step.end());
      s->body = std::move(body);
      out.push_back(s);
      return;
    }
    if (at(Tok::KwReturn)) {
      eat();
      auto s = new_stmt(StmtKind::Return, loc);
      if (!at(Tok::Semi)) s->a = parse_expr();
      expect(Tok::Semi, "';'");
      out.push_back(s);
      return;
    }
    if (is_type_start(tok().kind) ||
        (at(Tok::Ident) && tok().text == "atomic_int")) {
      parse_local_decl(out);
      expect(Tok::Semi, "';'");
      return;
    }
    parse_simple_into(out);
    expect(Tok::Semi, "';'");
  }

  void parse_local_decl(std::vector<AstStmtPtr> &out) {
    Quals q = parse_quals();
    if (q.thread_local_q)
      throw FrontendError(tok().loc, "thread_local is only supported on globals");
    TypePtr base = parse_base_type(q);
    for (;;) {
      Declarator d = parse_declarator(base, false);
      if (!cur_fn_) throw FrontendError(d.loc, "declaration outside function");
      if (cur_fn_->locals.count(d.name) || cur_fn_->formal_type(d.name))
        throw FrontendError(d.loc, "redefinition of '" + d.name + "'");
      cur_fn_->locals.emplace(d.name, LocalDecl{d.type, q.atomic, d.loc});
      if (accept(Tok::Assign)) {
        ExprPtr lhs = mk_var(d.name, VarScope::Local, cur_fn_->name, d.type, d.loc);
        parse_assignment_rhs(out, lhs, d.loc);
      }
      if (!accept(Tok::Comma)) break;
    }
  }

  // assignment / call / ++ / --
  void parse_simple_into(std::vector<AstStmtPtr> &out) {
    SourceLoc loc = tok().loc;
    // Direct call statement?
    if (at(Tok::Ident) && tok(1).kind == Tok::LParen && !is_var_name(tok().text)) {
      parse_call_stmt(out, nullptr, loc);
      return;
    }
    ExprPtr lv = parse_unary();
    require_lvalue(lv);
    if (accept(Tok::PlusPlus)) {
      push_assign(out, lv, mk_binary(BinOp::Add, lv, mk_int(1, loc), lv->type, loc), loc);
      return;
    }
    if (accept(Tok::MinusMinus)) {
      push_assign(out, lv, mk_binary(BinOp::Sub, lv, mk_int(1, loc), lv->type, loc), loc);
      return;
    }
    if (at(Tok::LParen) && lv->kind == ExprKind::Var && lv->type &&
        lv->type->is_pointer() && lv->type->elem &&
        lv->type->elem->kind == TypeKind::Func) {
      // call through a function pointer variable
      parse_call_stmt(out, lv, loc);
      return;
    }
    BinOp op = BinOp::Add;
    bool compound = false;
    if (accept(Tok::PlusAssign)) { op = BinOp::Add; compound = true; }
    else if (accept(Tok::MinusAssign)) { op = BinOp::Sub; compound = true; }
    else if (accept(Tok::StarAssign)) { op = BinOp::Mul; compound = true; }
    else if (accept(Tok::SlashAssign)) { op = BinOp::Div; compound = true; }
    else expect(Tok::Assign, "'=' or call");
    if (compound) {
      ExprPtr rhs = parse_expr();
      push_assign(out, lv, mk_binary(op, lv, rhs, lv->type, loc), loc);
      return;
    }
    parse_assignment_rhs(out, lv, loc);
  }

  // Parses the right-hand side of `lv = ...` -- either a call, malloc, or a
  // plain expression.
  void parse_assignment_rhs(std::vector<AstStmtPtr> &out, ExprPtr lv, SourceLoc loc) {
    if (at(Tok::Ident) && tok(1).kind == Tok::LParen && !is_var_name(tok().text)) {
      parse_call_stmt(out, lv, loc);
      return;
    }
    if (at(Tok::Ident) && tok(1).kind == Tok::LParen && is_var_name(tok().text)) {
      ExprPtr fp = resolve_ident(tok().text, tok().loc);
      if (fp->type && fp->type->is_pointer() && fp->type->elem &&
          fp->type->elem->kind == TypeKind::Func) {
        eat();
        parse_call_args_stmt(out, lv, fp, loc);
        return;
      }
    }
    ExprPtr rhs = parse_expr();
    check_assignable(lv->type, rhs, loc);
    push_assign(out, lv, rhs, loc);
  }

  void push_assign(std::vector<AstStmtPtr> &out, ExprPtr lv, ExprPtr rhs, SourceLoc loc) {
    auto s = new_stmt(StmtKind::Assign, loc);
    s->lhs = std::move(lv);
    s->a = std::move(rhs);
    out.push_back(s);
  }

  void parse_call_stmt(std::vector<AstStmtPtr> &out, ExprPtr lhs, SourceLoc loc) {
    const Token &nm = expect(Tok::Ident, "function name");
    std::string name = nm.text;
    ExprPtr callee;
    if (prog_.functions.count(name)) {
      auto &fn = prog_.functions.at(name);
      callee = mk_func_ref(name, ty_func(fn.ret, static_cast<int>(fn.formals.size())), nm.loc);
    } else if (name == "malloc" || name == "calloc" || name == "free" ||
               prog_.config.is_concurrency_fn(name)) {
      callee = mk_func_ref(name, ty_func(ty_void_ptr(), 1), nm.loc);
    } else {
      throw FrontendError(nm.loc, "unknown identifier '" + name + "'");
    }
    parse_call_args_stmt(out, std::move(lhs), std::move(callee), loc);
  }

  void parse_call_args_stmt(std::vector<AstStmtPtr> &out, ExprPtr lhs, ExprPtr callee,
                            SourceLoc loc) {
    expect(Tok::LParen, "'('");
    std::vector<ExprPtr> args;
    if (!accept(Tok::RParen)) {
      for (;;) {
        args.push_back(parse_expr());
        if (accept(Tok::RParen)) break;
        expect(Tok::Comma, "',' in argument list");
      }
    }
    std::string name = callee->kind == ExprKind::FuncRef ? callee->name : "";
    if (name == "malloc" || name == "calloc") {
      if (!lhs) throw FrontendError(loc, "result of malloc must be assigned");
      if (args.size() < 1) throw FrontendError(loc, "malloc needs a size argument");
      ExprPtr size = args[0];
      if (name == "calloc" && args.size() == 2)
        size = mk_binary(BinOp::Mul, args[0], args[1], ty_int(), loc);
      auto s = new_stmt(StmtKind::Alloc, loc);
      s->lhs = std::move(lhs);
      s->a = std::move(size);
      out.push_back(s);
      return;
    }
    if (name == "free") {
      if (args.size() != 1) throw FrontendError(loc, "free takes one argument");
      auto s = new_stmt(StmtKind::Free, loc);
      s->a = args[0];
      out.push_back(s);
      return;
    }
    auto s = new_stmt(StmtKind::Call, loc);
    s->lhs = std::move(lhs);
    s->a = std::move(callee);
    s->args = std::move(args);
    classify_call(*s);
    // arity check for user-defined functions
    if (s->a->kind == ExprKind::FuncRef && prog_.functions.count(s->a->name)) {
      auto &fn = prog_.functions.at(s->a->name);
      if (fn.formals.size() != s->args.size() &&
          !(s->role == ConcRole::None && false))
        if (s->role == ConcRole::None)
          throw FrontendError(loc, "call to '" + s->a->name + "' with " +
                                       std::to_string(s->args.size()) +
                                       " args, expected " +
                                       std::to_string(fn.formals.size()));
    }
    out.push_back(s);
  }

  void classify_call(AstStmt &s) {
    if (s.a->kind != ExprKind::FuncRef) return;
    const std::string &n = s.a->name;
    auto &cfg = prog_.config;
    auto check_pos = [&](int p, const char *what) {
      if (p >= 0 && p >= static_cast<int>(s.args.size()))
        throw FrontendError(s.loc, std::string(what) + " argument position " +
                                       std::to_string(p) + " out of range for '" +
                                       n + "'");
    };
    if (auto *c = cfg.find_create(n)) {
      s.role = ConcRole::Create;
      s.create_fn = *c;
      check_pos(c->entry_pos, "entry");
      if (c->id_pos >= 0 && c->id_pos < static_cast<int>(s.args.size())) {
        // keep as configured
      } else if (c->id_pos >= 0) {
        s.create_fn->id_pos = -1;  // id omitted at this call site
      }
      if (c->arg_pos >= static_cast<int>(s.args.size())) s.create_fn->arg_pos = -1;
    } else if (auto *j = cfg.find_join(n)) {
      s.role = ConcRole::Join;
      s.join_fn = *j;
      check_pos(j->id_pos, "thread-id");
    } else if (auto *l = cfg.find_lock(n)) {
      s.role = ConcRole::Lock;
      s.lock_fn = *l;
      check_pos(l->lock_pos, "lock");
    } else if (auto *u = cfg.find_unlock(n)) {
      s.role = ConcRole::Unlock;
      s.unlock_fn = *u;
      check_pos(u->lock_pos, "lock");
    } else if (cfg.is_atomic_fn(n)) {
      s.role = ConcRole::Atomic;
    }
  }

  // -- expressions -----------------------------------------------------------

  bool is_var_name(const std::string &n) const {
    if (cur_fn_ && (cur_fn_->locals.count(n) || cur_fn_->formal_type(n))) return true;
    return prog_.find_global(n) != nullptr;
  }

  ExprPtr resolve_ident(const std::string &n, SourceLoc loc) {
    if (cur_fn_) {
      auto it = cur_fn_->locals.find(n);
      if (it != cur_fn_->locals.end())
        return mk_var(n, VarScope::Local, cur_fn_->name, it->second.type, loc);
      if (auto *t = cur_fn_->formal_type(n))
        return mk_var(n, VarScope::Formal, cur_fn_->name, *t, loc);
    }
    if (auto *g = prog_.find_global(n)) return mk_var(n, VarScope::Global, "", g->type, loc);
    if (prog_.functions.count(n)) {
      auto &fn = prog_.functions.at(n);
      return mk_func_ref(n, ty_func(fn.ret, static_cast<int>(fn.formals.size())), loc);
    }
    throw FrontendError(loc, "unknown identifier '" + n + "'");
  }

  ExprPtr parse_expr() { return parse_lor(); }

  ExprPtr parse_lor() {
    ExprPtr l = parse_land();
    while (at(Tok::OrOr)) {
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_land();
      l = mk_binary(BinOp::LOr, l, r, ty_int(), loc);
    }
    return l;
  }

  ExprPtr parse_land() {
    ExprPtr l = parse_eq();
    while (at(Tok::AndAnd)) {
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_eq();
      l = mk_binary(BinOp::LAnd, l, r, ty_int(), loc);
    }
    return l;
  }

  ExprPtr parse_eq() {
    ExprPtr l = parse_rel();
    for (;;) {
      BinOp op;
      if (at(Tok::EqEq)) op = BinOp::Eq;
      else if (at(Tok::NotEq)) op = BinOp::Ne;
      else break;
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_rel();
      l = mk_binary(op, l, r, ty_int(), loc);
    }
    return l;
  }

  ExprPtr parse_rel() {
    ExprPtr l = parse_add();
    for (;;) {
      BinOp op;
      if (at(Tok::Lt)) op = BinOp::Lt;
      else if (at(Tok::Le)) op = BinOp::Le;
      else if (at(Tok::Gt)) op = BinOp::Gt;
      else if (at(Tok::Ge)) op = BinOp::Ge;
      else break;
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_add();
      l = mk_binary(op, l, r, ty_int(), loc);
    }
    return l;
  }

  ExprPtr parse_add() {
    ExprPtr l = parse_mul();
    for (;;) {
      BinOp op;
      if (at(Tok::Plus)) op = BinOp::Add;
      else if (at(Tok::Minus)) op = BinOp::Sub;
      else break;
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_mul();
      TypePtr ty = ty_int();
      if (l->type && (l->type->is_pointer() || l->type->is_array())) ty = l->type;
      else if (r->type && (r->type->is_pointer() || r->type->is_array())) ty = r->type;
      l = mk_binary(op, l, r, ty, loc);
    }
    return l;
  }

  ExprPtr parse_mul() {
    ExprPtr l = parse_unary();
    for (;;) {
      BinOp op;
      if (at(Tok::Star)) op = BinOp::Mul;
      else if (at(Tok::Slash)) op = BinOp::Div;
      else if (at(Tok::Percent)) op = BinOp::Mod;
      else break;
      SourceLoc loc = eat().loc;
      ExprPtr r = parse_unary();
      require_scalar(l, "arithmetic operand");
      require_scalar(r, "arithmetic operand");
      l = mk_binary(op, l, r, ty_int(), loc);
    }
    return l;
  }

  ExprPtr parse_unary() {
    SourceLoc loc = tok().loc;
    if (accept(Tok::Minus)) return mk_unary(UnOp::Neg, parse_unary(), loc);
    if (accept(Tok::Bang)) return mk_unary(UnOp::Not, parse_unary(), loc);
    if (accept(Tok::Star)) {
      ExprPtr sub = parse_unary();
      if (!sub->type || !(sub->type->is_pointer() || sub->type->is_array()))
        throw FrontendError(loc, "cannot dereference non-pointer");
      if (sub->type->elem && sub->type->elem->kind == TypeKind::Void)
        throw FrontendError(loc, "cannot dereference void*; cast it first");
      return mk_deref(sub, loc);
    }
    if (accept(Tok::Amp)) {
      ExprPtr sub = parse_unary();
      require_lvalue(sub);
      return mk_addr_of(sub, loc);
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (at(Tok::LBracket)) {
      SourceLoc loc = eat().loc;
      ExprPtr idx = parse_expr();
      expect(Tok::RBracket, "']'");
      if (!e->type || !(e->type->is_array() || e->type->is_pointer()))
        throw FrontendError(loc, "subscripted value is not an array or pointer");
      e = mk_index(e, idx, loc);
    }
    return e;
  }

  ExprPtr parse_primary() {
    SourceLoc loc = tok().loc;
    if (at(Tok::Int)) {
      long long v = eat().int_val;
      return mk_int(v, loc);
    }
    if (accept(Tok::KwNull)) return mk_null(loc);
    if (accept(Tok::KwSizeof)) {
      expect(Tok::LParen, "'('");
      Quals q;
      TypePtr t = parse_base_type(q);
      int stars = 0;
      while (accept(Tok::Star)) ++stars;
      for (int k = 0; k < stars; ++k) t = ty_ptr(t);
      expect(Tok::RParen, "')'");
      return mk_int(size_of(t), loc);
    }
    if (at(Tok::LParen)) {
      // (*)  nondet | (type) cast | (expr)
      if (tok(1).kind == Tok::Star && tok(2).kind == Tok::RParen) {
        eat();
        eat();
        eat();
        return mk_nondet(loc);
      }
      if (is_type_start(tok(1).kind) ||
          (tok(1).kind == Tok::Ident && tok(1).text == "atomic_int")) {
        eat();  // (
        Quals q;
        TypePtr t = parse_base_type(q);
        int stars = 0;
        while (accept(Tok::Star)) ++stars;
        for (int k = 0; k < stars; ++k) t = ty_ptr(t);
        expect(Tok::RParen, "')'");
        ExprPtr sub = parse_unary();
        return mk_cast(t, sub, loc);
      }
      eat();
      ExprPtr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident)) {
      const Token &t = eat();
      return resolve_ident(t.text, t.loc);
    }
    throw FrontendError(loc, "expected expression");
  }

  // -- light type checks -----------------------------------------------------

  void require_lvalue(const ExprPtr &e) {
    switch (e->kind) {
    case ExprKind::Var:
      if (e->type && e->type->is_array())
        throw FrontendError(e->loc, "arrays are not assignable");
      return;
    case ExprKind::Deref:
    case ExprKind::Index:
      return;
    default:
      throw FrontendError(e->loc, "expression is not an lvalue");
    }
  }

  void require_scalar(const ExprPtr &e, const char *what) {
    if (e->type && (e->type->kind == TypeKind::Mutex ||
                    e->type->kind == TypeKind::RwLock))
      throw FrontendError(e->loc, std::string(what) + " cannot have lock type");
  }

  void check_assignable(const TypePtr &lhs, const ExprPtr &rhs, SourceLoc loc) {
    if (!lhs || !rhs->type) return;
    if (lhs->is_lockable())
      throw FrontendError(loc, "cannot assign to a lock object");
    bool lp = lhs->is_pointer();
    bool rp = rhs->type->is_pointer() || rhs->type->is_array() ||
              rhs->kind == ExprKind::Null || rhs->kind == ExprKind::FuncRef;
    bool rz = rhs->kind == ExprKind::IntLit && rhs->int_val == 0;
    if (lp && !(rp || rz))
      throw FrontendError(loc, "type error: assigning non-pointer to pointer");
    if (!lp && rp && lhs->kind != TypeKind::ThreadId && lhs->kind != TypeKind::Int)
      throw FrontendError(loc, "type error: assigning pointer to non-pointer");
    if (!lp && rp && lhs->kind == TypeKind::Int && rhs->kind != ExprKind::Null)
      throw FrontendError(loc, "type error: assigning pointer to int");
  }
};

} // namespace detail

/// Parses and lowers a mini-C program. Calls to configured concurrency
/// functions come back annotated with their role.
inline IRProgram parse_program(const SourceProgram &src) {
  if (src.files.empty()) throw FrontendError({}, "no input files");
  src.concurrency.validate();
  IRProgram prog;
  prog.config = src.concurrency;
  detail::Parser p(prog);
  p.run(src.files);
  if (!prog.functions.count("main"))
    throw FrontendError({}, "program has no 'main' function");
  lower_cfg(prog);
  return prog;
}

inline IRProgram parse_source(const std::string &text, const std::string &name = "input.c",
                              ConcurrencyConfig cfg = default_concurrency_config()) {
  SourceProgram sp;
  sp.files.push_back({name, text});
  sp.concurrency = std::move(cfg);
  return parse_program(sp);
}

} // namespace racerlite
