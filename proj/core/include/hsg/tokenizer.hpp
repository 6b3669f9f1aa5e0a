#pragma once

#include <string>
#include <string_view>

#include "hsg/errors.hpp"

namespace hsg {

// Length rewards are meaningless without a fixed tokenizer, so the tokenizer
// is a named, versioned component recorded in run metadata. "ws-v1" counts
// maximal non-whitespace runs.
class Tokenizer {
 public:
  explicit Tokenizer(std::string id = "ws-v1") : id_(std::move(id)) {
    if (id_ != "ws-v1") {
      throw config_error("unknown_tokenizer", "unknown tokenizer id: " + id_);
    }
  }

  const std::string& id() const { return id_; }

  int count(std::string_view text) const {
    int tokens = 0;
    bool in_token = false;
    for (char c : text) {
      const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
      if (!ws && !in_token) {
        ++tokens;
        in_token = true;
      } else if (ws) {
        in_token = false;
      }
    }
    return tokens;
  }

 private:
  std::string id_;
};

}  // namespace hsg
