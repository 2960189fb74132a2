#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sepnmf {

enum class ErrorKind {
  ZeroColumn,
  NegativeEntry,
  NonFinite,
  SingularGram,
  DimensionMismatch,
  NonFiniteState,
  InvalidInput,
  EmptyAnchorSet,
  RegimeMismatch,
  NoRegime,
  GenerationFailure,
  Parse,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
// row()/col() carry the offending 0-based position when one exists.
class NmfError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  NmfError(ErrorKind kind, const std::string& what, std::size_t row = npos,
           std::size_t col = npos)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        row_(row),
        col_(col) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  ErrorKind kind_;
  std::size_t row_;
  std::size_t col_;
};

}  // namespace sepnmf
