#pragma once

#include <stdexcept>
#include <string>

namespace stylo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, model specification or degenerate numerical input.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Malformed data files (lexicon, cache, tables).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace stylo
