#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>

#include "racerlite/backend.hpp"

namespace racerlite {

/// Abstract-interpreter backend: forward, flow-sensitive, context-sensitive
/// (call strings of bounded length) interpretation of one thread as a
/// sequential program, worklist over the CFG with widening at loop heads.
class InterpBackend : public Backend {
public:
  InterpBackend(const IRProgram &prog, int ctx_depth = 1)
      : prog_(&prog), depth_(static_cast<size_t>(ctx_depth)) {}

  const char *name() const override { return "interp"; }

  void set_weak_sites(const std::set<StmtId> &ws) override {
    if (weak_sites_ == ws) return;
    weak_sites_ = ws;
    cache_.clear();
    current_.clear();
  }

  void clear_results() override {
    cache_.clear();
    current_.clear();
  }

  void analyse_thread(const std::string &entry, const AbstractState &init) override {
    std::string key = entry + "\n" + state_fingerprint(init);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      current_[entry] = it->second;
      return;
    }
    ++analyse_misses;
    auto res = std::make_shared<ThreadResult>();
    res->thread = entry;
    if (prog_->functions.count(entry)) {
      Frame top;
      top.calls = {};
      top.stack = {entry};
      run_function(*res, entry, init, top);
      fill_unreached(*res);
    } else {
      note("unknown thread entry '" + entry + "'");
    }
    cache_[key] = res;
    current_[entry] = res;
  }

  AbstractState state(const Context &c) const override {
    auto tr = result_for(c.thread);
    if (!tr) return AbstractState::initial();  // unknown thread: top
    auto it = tr->pre.find(c);
    if (it != tr->pre.end()) return it->second;
    return AbstractState::bottom();
  }

  AbstractValue value(const Context &c, const ExprPtr &e) const override {
    AbstractState s = state(c);
    if (!s.reachable) return AbstractValue::bottom();
    return eval_expr(menv(), s, e);
  }

  std::set<Address> value_ptr(const Context &c, const ExprPtr &e) const override {
    AbstractState s = state(c);
    if (!s.reachable) return {};
    if (e->type && (e->type->is_pointer() || e->type->is_array())) {
      AbstractValue v = eval_expr(menv(), s, e);
      if (v.kind == AbstractValue::Kind::Ptr) return v.ptrs;
      return {};
    }
    LvalueResult lv = eval_lvalue(menv(), s, e);
    return lv.addrs;
  }

  std::set<std::string> functions(const Context &c, const ExprPtr &e) const override {
    if (e->kind == ExprKind::FuncRef) return {e->name};
    std::set<std::string> out;
    AbstractState s = state(c);
    if (!s.reachable) return out;
    AbstractValue v = eval_expr(menv(), s, e);
    if (v.kind == AbstractValue::Kind::Ptr)
      for (auto &a : v.ptrs)
        if (a.base.kind == BaseKind::Func && prog_->functions.count(a.base.name))
          out.insert(a.base.name);
    return out;
  }

  StmtAccesses accesses(const Context &c) const override {
    auto tr = result_for(c.thread);
    if (tr) {
      auto it = tr->access_cache.find(c);
      if (it != tr->access_cache.end()) return it->second;
    }
    AbstractState s = state(c);
    StmtAccesses acc;
    if (s.reachable) acc = accesses_of_stmt(menv(), s, prog_->stmt(c.stmt));
    if (tr) tr->access_cache[c] = acc;
    return acc;
  }

  AbstractState join_all_states(const std::string &thread) const override {
    auto tr = result_for(thread);
    if (!tr) return AbstractState::bottom();
    AbstractState out = AbstractState::bottom();
    for (auto &[c, s] : tr->pre) out = join_state(out, s);
    return out;
  }

private:
  struct ThreadResult {
    std::string thread;
    std::map<Context, AbstractState> pre;
    std::set<std::string> analysed_fns;
    // function summaries: (fn, calls, entry fingerprint) -> (exit, ret)
    std::map<std::string, std::pair<AbstractState, AbstractValue>> summaries;
    mutable std::map<Context, StmtAccesses> access_cache;
  };

  struct Frame {
    std::vector<CallSite> calls;          // truncated to depth_
    std::vector<std::string> stack;       // full stack for recursion detection
  };

  const IRProgram *prog_;
  size_t depth_;
  std::set<StmtId> weak_sites_;
  std::map<std::string, std::shared_ptr<ThreadResult>> cache_;
  std::map<std::string, std::shared_ptr<ThreadResult>> current_;

  MemEnv menv() const { return {prog_, &weak_sites_}; }

  std::shared_ptr<ThreadResult> result_for(const std::string &thread) const {
    auto it = current_.find(thread);
    return it == current_.end() ? nullptr : it->second;
  }

  static std::string summary_key(const std::string &fn,
                                 const std::vector<CallSite> &calls,
                                 const AbstractState &entry) {
    std::string k = fn;
    for (auto &c : calls) k += "|" + std::to_string(c.site) + ":" + c.callee;
    k += "\n" + state_fingerprint(entry);
    return k;
  }

  void strip_frame_bases(AbstractState &s, const std::string &fn) const {
    for (auto it = s.env.begin(); it != s.env.end();) {
      if ((it->first.kind == BaseKind::Local || it->first.kind == BaseKind::Formal) &&
          it->first.func == fn)
        it = s.env.erase(it);
      else
        ++it;
    }
  }

  AbstractState havoc_reachable(AbstractState s) const {
    // Globals plus everything reachable from them or from frame values.
    std::set<Base> todo;
    for (auto &[b, v] : s.env) todo.insert(b);
    for (auto &b : todo) s.set(b, AbstractValue::top());
    return s;
  }

  // Runs one function; records pre-states into res keyed by frame context.
  // Returns (exit state, join of returned values).
  std::pair<AbstractState, AbstractValue> run_function(ThreadResult &res,
                                                       const std::string &fn_name,
                                                       const AbstractState &entry,
                                                       const Frame &frame) {
    std::string key = summary_key(fn_name, frame.calls, entry);
    auto sit = res.summaries.find(key);
    if (sit != res.summaries.end()) return sit->second;
    res.analysed_fns.insert(fn_name);
    const Function &fn = prog_->functions.at(fn_name);

    std::map<StmtId, AbstractState> in;
    std::map<StmtId, int> widen_count;
    std::deque<StmtId> wl;
    std::set<StmtId> queued;
    in[fn.entry] = entry;
    wl.push_back(fn.entry);
    queued.insert(fn.entry);

    AbstractState exit_state = AbstractState::bottom();
    AbstractValue ret = AbstractValue::bottom();

    auto push = [&](StmtId id, const AbstractState &contrib) {
      if (!contrib.reachable) return;
      AbstractState &slot = in[id];
      AbstractState merged = join_state(slot, contrib);
      bool is_loop_head = prog_->stmt(id).kind == StmtKind::LoopHead;
      if (is_loop_head && slot.reachable && !leq_state(merged, slot)) {
        int &n = ++widen_count[id];
        if (n >= 2) merged = widen_state(slot, merged);
      }
      if (slot.reachable && leq_state(merged, slot)) return;
      slot = std::move(merged);
      if (queued.insert(id).second) wl.push_back(id);
    };

    while (!wl.empty()) {
      StmtId id = wl.front();
      wl.pop_front();
      queued.erase(id);
      AbstractState st = in[id];
      if (!st.reachable) continue;
      Context ctx{res.thread, frame.calls, id};
      auto pit = res.pre.find(ctx);
      if (pit == res.pre.end()) res.pre.emplace(ctx, st);
      else pit->second = join_state(pit->second, st);

      const Stmt &s = prog_->stmt(id);
      auto succs_it = fn.succ.find(id);
      static const std::vector<Edge> kNoEdges;
      const std::vector<Edge> &succs =
          succs_it == fn.succ.end() ? kNoEdges : succs_it->second;

      if (s.kind == StmtKind::Return) {
        AbstractState out = st;
        if (s.a) ret = join_value(ret, eval_expr(menv(), st, s.a));
        else ret = join_value(ret, AbstractValue::top());
        exit_state = join_state(exit_state, out);
        continue;
      }

      if (s.is_call() && s.role == ConcRole::None) {
        AbstractState post = exec_call(res, st, s, frame, ctx);
        if (s.kind == StmtKind::GuardedCall) post = join_state(post, st);
        for (auto &e : succs) push(e.target, post);
        continue;
      }

      StepResult step = transfer_stmt(menv(), st, s);
      if (step.surely_invalid) {
        note("surely invalid access at " + s.loc.str());
        continue;  // execution cannot proceed
      }
      for (auto &e : succs) {
        switch (e.kind) {
        case EdgeKind::Then: push(e.target, step.taken); break;
        case EdgeKind::Else: push(e.target, step.other); break;
        case EdgeKind::Fall: push(e.target, step.fall); break;
        }
      }
    }

    auto result = std::make_pair(exit_state, ret);
    res.summaries[key] = result;
    return result;
  }

  AbstractState exec_call(ThreadResult &res, const AbstractState &st, const Stmt &s,
                          const Frame &frame, const Context &ctx) {
    std::set<std::string> targets;
    if (auto d = direct_callee(s)) {
      if (prog_->functions.count(*d)) targets.insert(*d);
    } else {
      AbstractValue v = eval_expr(menv(), st, s.a);
      if (v.kind == AbstractValue::Kind::Ptr) {
        for (auto &a : v.ptrs)
          if (a.base.kind == BaseKind::Func && prog_->functions.count(a.base.name))
            targets.insert(a.base.name);
      }
    }
    if (targets.empty()) {
      note("unresolved call at " + s.loc.str() + "; havocking state");
      AbstractState post = havoc_reachable(st);
      return assign_call_result(post, s, AbstractValue::top());
    }
    AbstractState joined = AbstractState::bottom();
    for (auto &t : targets) {
      if (std::count(frame.stack.begin(), frame.stack.end(), t)) {
        note("recursion beyond call-string bound at " + s.loc.str() +
             "; havocking reachable bases");
        AbstractState post = havoc_reachable(st);
        joined = join_state(joined, assign_call_result(post, s, AbstractValue::top()));
        continue;
      }
      const Function &callee = prog_->functions.at(t);
      AbstractState entry = st;
      strip_frame_bases(entry, t);
      for (size_t i = 0; i < callee.formals.size(); ++i) {
        AbstractValue av = i < s.args.size()
                               ? eval_expr(menv(), st, s.args[i])
                               : AbstractValue::top();
        entry.set(Base::formal(t, callee.formals[i].first, callee.formals[i].second),
                  av);
      }
      Frame inner;
      inner.calls = ctx.push_call(s.id, t, depth_).calls;
      inner.stack = frame.stack;
      inner.stack.push_back(t);
      auto [exit, ret] = run_function(res, t, entry, inner);
      if (!exit.reachable) continue;  // callee never returns on this path
      AbstractState post = exit;
      strip_frame_bases(post, t);
      joined = join_state(joined, assign_call_result(post, s, ret));
    }
    return joined;
  }

  AbstractState assign_call_result(AbstractState post, const Stmt &s,
                                   const AbstractValue &ret) {
    if (!post.reachable || !s.lhs) return post;
    LvalueResult lv = eval_lvalue(menv(), post, s.lhs);
    if (!lv.unknown_target && !lv.surely_invalid) store(post, lv.addrs, ret);
    return post;
  }

  // Reachable-but-unvisited contexts read as bottom; materialize them so that
  // every syntactically reachable context has an entry.
  void fill_unreached(ThreadResult &res) {
    for (auto &fname : res.analysed_fns) {
      const Function &fn = prog_->functions.at(fname);
      std::set<std::vector<CallSite>> strings;
      for (auto &[c, st] : res.pre) {
        if (prog_->stmt(c.stmt).func == fname) strings.insert(c.calls);
      }
      for (auto &calls : strings)
        for (StmtId id : fn.order)
          res.pre.emplace(Context{res.thread, calls, id}, AbstractState::bottom());
    }
  }
};

} // namespace racerlite
