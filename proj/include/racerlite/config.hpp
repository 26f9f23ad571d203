#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "racerlite/diag.hpp"

namespace racerlite {

enum class LockMode { Plain, Read, Write };

inline const char *lock_mode_str(LockMode m) {
  switch (m) {
  case LockMode::Plain: return "plain";
  case LockMode::Read: return "read";
  case LockMode::Write: return "write";
  }
  return "?";
}

struct CreateFn {
  std::string name;
  int entry_pos = 0;  // argument holding the thread entry point
  int id_pos = -1;    // argument holding &thread_id, -1 if none
  int arg_pos = -1;   // argument passed to the thread, -1 if none
};

struct JoinFn {
  std::string name;
  int id_pos = 0;  // argument holding the thread id value
};

struct LockFn {
  std::string name;
  int lock_pos = 0;
  bool blocking = true;       // non-blocking = trylock-style, returns success value
  LockMode mode = LockMode::Plain;
  long long success_value = 0;  // return value meaning "acquired" for non-blocking
};

struct UnlockFn {
  std::string name;
  int lock_pos = 0;
};

/// Classification of the concurrency API, normally loaded from a JSON file.
/// Defaults cover pthreads plus the shorthand names used throughout the
/// bundled test programs (create/join/lock/unlock/...).
struct ConcurrencyConfig {
  std::vector<CreateFn> create_fns;
  std::vector<JoinFn> join_fns;
  std::vector<LockFn> lock_fns;
  std::vector<UnlockFn> unlock_fns;
  std::set<std::string> atomic_fns;
  bool check_thread_signature = true;

  const CreateFn *find_create(const std::string &n) const {
    for (auto &f : create_fns) if (f.name == n) return &f;
    return nullptr;
  }
  const JoinFn *find_join(const std::string &n) const {
    for (auto &f : join_fns) if (f.name == n) return &f;
    return nullptr;
  }
  const LockFn *find_lock(const std::string &n) const {
    for (auto &f : lock_fns) if (f.name == n) return &f;
    return nullptr;
  }
  const UnlockFn *find_unlock(const std::string &n) const {
    for (auto &f : unlock_fns) if (f.name == n) return &f;
    return nullptr;
  }
  bool is_atomic_fn(const std::string &n) const { return atomic_fns.count(n) > 0; }
  bool is_concurrency_fn(const std::string &n) const {
    return find_create(n) || find_join(n) || find_lock(n) || find_unlock(n) ||
           is_atomic_fn(n);
  }

  // Every name may appear in at most one role.
  void validate() const {
    std::map<std::string, int> seen;
    auto add = [&](const std::string &n) {
      if (++seen[n] > 1)
        throw FrontendError({}, "concurrency config: function '" + n +
                                    "' declared in more than one role");
    };
    for (auto &f : create_fns) add(f.name);
    for (auto &f : join_fns) add(f.name);
    for (auto &f : lock_fns) add(f.name);
    for (auto &f : unlock_fns) add(f.name);
    for (auto &f : atomic_fns) add(f);
  }
};

/// pthreads bindings plus the paper-style shorthands.
inline ConcurrencyConfig default_concurrency_config() {
  ConcurrencyConfig c;
  c.create_fns = {
      {"pthread_create", /*entry*/ 2, /*id*/ 0, /*arg*/ 3},
      {"create", /*entry*/ 0, /*id*/ -1, /*arg*/ 1},
      {"create_id", /*entry*/ 1, /*id*/ 0, /*arg*/ 2},
  };
  c.join_fns = {
      {"pthread_join", 0},
      {"join", 0},
  };
  c.lock_fns = {
      {"pthread_mutex_lock", 0, true, LockMode::Write, 0},
      {"pthread_mutex_trylock", 0, false, LockMode::Write, 0},
      {"pthread_rwlock_rdlock", 0, true, LockMode::Read, 0},
      {"pthread_rwlock_wrlock", 0, true, LockMode::Write, 0},
      {"pthread_rwlock_tryrdlock", 0, false, LockMode::Read, 0},
      {"pthread_rwlock_trywrlock", 0, false, LockMode::Write, 0},
      {"lock", 0, true, LockMode::Write, 0},
      {"trylock", 0, false, LockMode::Write, 0},
      {"rdlock", 0, true, LockMode::Read, 0},
      {"wrlock", 0, true, LockMode::Write, 0},
  };
  c.unlock_fns = {
      {"pthread_mutex_unlock", 0},
      {"pthread_rwlock_unlock", 0},
      {"unlock", 0},
  };
  c.atomic_fns = {"__atomic_store", "__atomic_load", "__atomic_add",
                  "atomic_store", "atomic_load", "atomic_add"};
  return c;
}

inline ConcurrencyConfig parse_concurrency_config(const std::string &json_text) {
  using nlohmann::json;
  json j = json::parse(json_text);
  ConcurrencyConfig c;
  if (j.value("pthread_defaults", true)) c = default_concurrency_config();
  if (j.contains("check_thread_signature"))
    c.check_thread_signature = j["check_thread_signature"].get<bool>();
  for (auto &e : j.value("create_fns", json::array()))
    c.create_fns.push_back({e.at("name").get<std::string>(),
                            e.at("entry_pos").get<int>(), e.value("id_pos", -1),
                            e.value("arg_pos", -1)});
  for (auto &e : j.value("join_fns", json::array()))
    c.join_fns.push_back({e.at("name").get<std::string>(), e.value("id_pos", 0)});
  for (auto &e : j.value("lock_fns", json::array())) {
    LockMode m = LockMode::Plain;
    std::string ms = e.value("mode", "plain");
    if (ms == "read") m = LockMode::Read;
    else if (ms == "write") m = LockMode::Write;
    else if (ms != "plain")
      throw FrontendError({}, "concurrency config: bad lock mode '" + ms + "'");
    c.lock_fns.push_back({e.at("name").get<std::string>(), e.value("lock_pos", 0),
                          e.value("blocking", true), m,
                          e.value("success_value", 0LL)});
  }
  for (auto &e : j.value("unlock_fns", json::array()))
    c.unlock_fns.push_back({e.at("name").get<std::string>(), e.value("lock_pos", 0)});
  for (auto &e : j.value("atomic_fns", json::array()))
    c.atomic_fns.insert(e.get<std::string>());
  c.validate();
  return c;
}

} // namespace racerlite
