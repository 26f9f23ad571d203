#pragma once

#include <cassert>
#include <memory>
#include <string>

namespace racerlite {

// The type universe is deliberately small: int, pointers, void*, mutex,
// rwlock, thread-id, fixed arrays thereof, plus function types for thread
// entry points.
enum class TypeKind { Void, Int, Mutex, RwLock, ThreadId, Pointer, Array, Func };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  TypeKind kind = TypeKind::Int;
  TypePtr elem;        // Pointer/Array element, Func return type
  int array_len = 0;   // Array
  int func_arity = 0;  // Func: number of parameters (all void* by convention)

  bool is_pointer() const { return kind == TypeKind::Pointer; }
  bool is_array() const { return kind == TypeKind::Array; }
  bool is_int() const { return kind == TypeKind::Int; }
  bool is_lockable() const { return kind == TypeKind::Mutex || kind == TypeKind::RwLock; }
};

inline TypePtr make_type(TypeKind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

inline TypePtr ty_void() { static TypePtr t = make_type(TypeKind::Void); return t; }
inline TypePtr ty_int() { static TypePtr t = make_type(TypeKind::Int); return t; }
inline TypePtr ty_mutex() { static TypePtr t = make_type(TypeKind::Mutex); return t; }
inline TypePtr ty_rwlock() { static TypePtr t = make_type(TypeKind::RwLock); return t; }
inline TypePtr ty_thread_id() { static TypePtr t = make_type(TypeKind::ThreadId); return t; }

inline TypePtr ty_ptr(TypePtr elem) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Pointer;
  t->elem = std::move(elem);
  return t;
}

inline TypePtr ty_array(TypePtr elem, int len) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Array;
  t->elem = std::move(elem);
  t->array_len = len;
  return t;
}

inline TypePtr ty_func(TypePtr ret, int arity) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Func;
  t->elem = std::move(ret);
  t->func_arity = arity;
  return t;
}

inline TypePtr ty_void_ptr() { static TypePtr t = ty_ptr(ty_void()); return t; }

// Byte layout used for offset reasoning: 4-byte ints, 8-byte pointers and
// opaque lock/thread handles.
inline long long size_of(const TypePtr &t) {
  if (!t) return 0;
  switch (t->kind) {
  case TypeKind::Void: return 1;
  case TypeKind::Int: return 4;
  case TypeKind::Mutex:
  case TypeKind::RwLock:
  case TypeKind::ThreadId: return 8;
  case TypeKind::Pointer:
  case TypeKind::Func: return 8;
  case TypeKind::Array: return t->array_len * size_of(t->elem);
  }
  return 0;
}

inline bool type_equal(const TypePtr &a, const TypePtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case TypeKind::Pointer: return type_equal(a->elem, b->elem);
  case TypeKind::Array: return a->array_len == b->array_len && type_equal(a->elem, b->elem);
  case TypeKind::Func: return a->func_arity == b->func_arity && type_equal(a->elem, b->elem);
  default: return true;
  }
}

inline std::string type_str(const TypePtr &t) {
  if (!t) return "?";
  switch (t->kind) {
  case TypeKind::Void: return "void";
  case TypeKind::Int: return "int";
  case TypeKind::Mutex: return "pthread_mutex_t";
  case TypeKind::RwLock: return "pthread_rwlock_t";
  case TypeKind::ThreadId: return "pthread_t";
  case TypeKind::Pointer: return type_str(t->elem) + " *";
  case TypeKind::Array:
    return type_str(t->elem) + "[" + std::to_string(t->array_len) + "]";
  case TypeKind::Func:
    return type_str(t->elem) + " (*)(" + std::to_string(t->func_arity) + " args)";
  }
  return "?";
}

// Thread entry point convention: void *fn(void *) or void *fn().
inline bool matches_thread_signature(const TypePtr &ret, int arity) {
  bool ret_ok = ret && ret->kind == TypeKind::Pointer && ret->elem &&
                ret->elem->kind == TypeKind::Void;
  return ret_ok && arity <= 1;
}

} // namespace racerlite
