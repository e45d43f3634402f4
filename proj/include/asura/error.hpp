#pragma once

#include <stdexcept>
#include <string>

namespace asura {

enum class errc {
  invalid_capacity,
  duplicate_node,
  unknown_node,
  empty_map,
  insufficient_nodes,
  map_too_large,
  extension_overflow,
  exhausted_sequence,
  bad_map_file,
  invalid_argument,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace asura
