#pragma once

#include <stdexcept>
#include <string>

namespace racerlite {

struct SourceLoc {
  std::string file;
  int line = 0;
  int col = 0;

  std::string str() const {
    if (file.empty() && line == 0) return "<unknown>";
    return file + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
};

/// Error thrown for malformed input programs or configs. Carries the
/// position of the offending token.
class FrontendError : public std::runtime_error {
public:
  FrontendError(const SourceLoc &loc, const std::string &msg)
      : std::runtime_error(loc.str() + ": " + msg), loc_(loc) {}

  const SourceLoc &where() const { return loc_; }

private:
  SourceLoc loc_;
};

} // namespace racerlite
