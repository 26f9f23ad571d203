#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "racerlite/memdom.hpp"

namespace racerlite {

/// Analysis context: (thread entry, latest calls bounded by the context
/// depth, statement). All analysis queries are keyed by contexts; a context
/// carries no information about thread creation or interleaving.
struct CallSite {
  StmtId site = kNoStmt;
  std::string callee;

  auto key() const { return std::tie(site, callee); }
  bool operator<(const CallSite &o) const { return key() < o.key(); }
  bool operator==(const CallSite &o) const { return key() == o.key(); }
};

struct Context {
  std::string thread;
  std::vector<CallSite> calls;  // oldest first, length <= depth
  StmtId stmt = kNoStmt;

  auto key() const { return std::tie(thread, calls, stmt); }
  bool operator<(const Context &o) const { return key() < o.key(); }
  bool operator==(const Context &o) const { return key() == o.key(); }

  Context push_call(StmtId site, const std::string &callee, size_t depth,
                    StmtId new_stmt = kNoStmt) const {
    Context c = *this;
    c.calls.push_back({site, callee});
    while (c.calls.size() > depth) c.calls.erase(c.calls.begin());
    c.stmt = new_stmt;
    return c;
  }
  Context at(StmtId s) const {
    Context c = *this;
    c.stmt = s;
    return c;
  }

  std::string str() const {
    std::string s = thread;
    for (auto &c : calls) s += ">" + c.callee + "@" + std::to_string(c.site);
    s += ":" + std::to_string(stmt);
    return s;
  }
};

/// Query interface of the sequential backend analysis. analyse_thread runs a
/// thread as a sequential program from the given initial state; the other
/// functions answer queries on the most recent result for the context's
/// thread.
class Backend {
public:
  virtual ~Backend() = default;

  virtual const char *name() const = 0;

  virtual void analyse_thread(const std::string &entry, const AbstractState &init) = 0;

  /// State before the context's statement; unreachable contexts yield bottom,
  /// contexts of never-analysed threads yield the top state.
  virtual AbstractState state(const Context &c) const = 0;

  virtual AbstractValue value(const Context &c, const ExprPtr &e) const = 0;

  /// Addresses a pointer expression may denote (for lock targets, thread
  /// arguments, escape reasoning). Lvalues of lockable type denote their own
  /// cell, so lock(m) and lock(&m) agree.
  virtual std::set<Address> value_ptr(const Context &c, const ExprPtr &e) const = 0;

  /// Resolution of a function designator or function pointer.
  virtual std::set<std::string> functions(const Context &c, const ExprPtr &e) const = 0;

  /// Reads and writes performed by the context's statement.
  virtual StmtAccesses accesses(const Context &c) const = 0;

  /// Join of the states recorded at all statements of the thread (the
  /// over-approximating equation's right-hand side).
  virtual AbstractState join_all_states(const std::string &thread) const = 0;

  virtual void set_weak_sites(const std::set<StmtId> &) {}
  virtual void clear_results() {}

  /// Number of analyse_thread evaluations that were not served by a cache.
  int analyse_misses = 0;
  std::vector<std::string> notes;

protected:
  void note(const std::string &n) {
    if (notes.size() < 256) notes.push_back(n);
  }
};

/// Enumerates the syntactically reachable contexts of a thread: every
/// statement of every function in the call-graph closure from the entry,
/// with call strings truncated to `depth`. Function-pointer calls are
/// resolved through the backend.
inline std::vector<Context> thread_contexts(const IRProgram &prog, const Backend &be,
                                            const std::string &thread, size_t depth) {
  std::vector<Context> out;
  std::set<std::pair<std::string, std::vector<CallSite>>> visited;

  std::function<void(const std::string &, const std::vector<CallSite> &)> walk =
      [&](const std::string &fn_name, const std::vector<CallSite> &calls) {
        if (!prog.functions.count(fn_name)) return;
        if (!visited.insert({fn_name, calls}).second) return;
        const Function &fn = prog.functions.at(fn_name);
        for (StmtId id : fn.order) {
          Context c{thread, calls, id};
          out.push_back(c);
          const Stmt &s = prog.stmt(id);
          if (!s.is_call() || s.role != ConcRole::None) continue;
          std::set<std::string> targets;
          if (auto d = direct_callee(s)) targets.insert(*d);
          else targets = be.functions(c, s.a);
          for (auto &t : targets) {
            if (!prog.functions.count(t)) continue;
            std::vector<CallSite> next = calls;
            next.push_back({id, t});
            while (next.size() > depth) next.erase(next.begin());
            walk(t, next);
          }
        }
      };
  walk(thread, {});
  return out;
}

/// All create-role statements syntactically reachable from a thread's entry
/// (call-graph closure, guards ignored), with the contexts they occur in.
inline std::vector<Context> reachable_creates(const IRProgram &prog, const Backend &be,
                                              const std::string &thread, size_t depth) {
  std::vector<Context> out;
  for (auto &c : thread_contexts(prog, be, thread, depth))
    if (prog.stmt(c.stmt).role == ConcRole::Create) out.push_back(c);
  return out;
}

} // namespace racerlite
