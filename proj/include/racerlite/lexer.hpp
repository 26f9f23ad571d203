#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "racerlite/diag.hpp"

namespace racerlite {

enum class Tok {
  End, Ident, Int,
  // keywords
  KwInt, KwVoid, KwIf, KwElse, KwWhile, KwFor, KwReturn, KwNull, KwSizeof,
  KwAtomic, KwThreadLocal, KwMutexT, KwRwlockT, KwThreadT,
  // punctuation
  LParen, RParen, LBrace, RBrace, LBracket, RBracket, Semi, Comma,
  Assign, PlusAssign, MinusAssign, StarAssign, SlashAssign,
  PlusPlus, MinusMinus,
  Plus, Minus, Star, Slash, Percent, Amp, Bang,
  EqEq, NotEq, Lt, Le, Gt, Ge, AndAnd, OrOr,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long int_val = 0;
  SourceLoc loc;
};

inline std::vector<Token> tokenize(const std::string &src, const std::string &file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto loc = [&]() { return SourceLoc{file, line, col}; };
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i < src.size() && src[i] == '\n') { ++line; col = 1; } else ++col;
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw FrontendError(loc(), "unterminated comment");
      advance(2);
      continue;
    }
    Token t;
    t.loc = loc();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      t.int_val = std::stoll(t.text);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.text = src.substr(i, j - i);
      advance(j - i);
      const std::string &w = t.text;
      if (w == "int") t.kind = Tok::KwInt;
      else if (w == "void") t.kind = Tok::KwVoid;
      else if (w == "if") t.kind = Tok::KwIf;
      else if (w == "else") t.kind = Tok::KwElse;
      else if (w == "while") t.kind = Tok::KwWhile;
      else if (w == "for") t.kind = Tok::KwFor;
      else if (w == "return") t.kind = Tok::KwReturn;
      else if (w == "NULL") t.kind = Tok::KwNull;
      else if (w == "sizeof") t.kind = Tok::KwSizeof;
      else if (w == "atomic" || w == "_Atomic") t.kind = Tok::KwAtomic;
      else if (w == "thread_local" || w == "_Thread_local" || w == "__thread")
        t.kind = Tok::KwThreadLocal;
      else if (w == "pthread_mutex_t") t.kind = Tok::KwMutexT;
      else if (w == "pthread_rwlock_t") t.kind = Tok::KwRwlockT;
      else if (w == "pthread_t") t.kind = Tok::KwThreadT;
      else t.kind = Tok::Ident;
      out.push_back(std::move(t));
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < src.size() && src[i + 1] == b;
    };
    if (two('+', '+')) { t.kind = Tok::PlusPlus; advance(2); }
    else if (two('-', '-')) { t.kind = Tok::MinusMinus; advance(2); }
    else if (two('+', '=')) { t.kind = Tok::PlusAssign; advance(2); }
    else if (two('-', '=')) { t.kind = Tok::MinusAssign; advance(2); }
    else if (two('*', '=')) { t.kind = Tok::StarAssign; advance(2); }
    else if (two('/', '=')) { t.kind = Tok::SlashAssign; advance(2); }
    else if (two('=', '=')) { t.kind = Tok::EqEq; advance(2); }
    else if (two('!', '=')) { t.kind = Tok::NotEq; advance(2); }
    else if (two('<', '=')) { t.kind = Tok::Le; advance(2); }
    else if (two('>', '=')) { t.kind = Tok::Ge; advance(2); }
    else if (two('&', '&')) { t.kind = Tok::AndAnd; advance(2); }
    else if (two('|', '|')) { t.kind = Tok::OrOr; advance(2); }
    else {
      switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      case ';': t.kind = Tok::Semi; break;
      case ',': t.kind = Tok::Comma; break;
      case '=': t.kind = Tok::Assign; break;
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '%': t.kind = Tok::Percent; break;
      case '&': t.kind = Tok::Amp; break;
      case '!': t.kind = Tok::Bang; break;
      case '<': t.kind = Tok::Lt; break;
      case '>': t.kind = Tok::Gt; break;
      default:
        throw FrontendError(t.loc, std::string("unexpected character '") + c + "'");
      }
      advance(1);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.loc = loc();
  out.push_back(std::move(end));
  return out;
}

} // namespace racerlite
