#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "robustq/model.hpp"

namespace robustq {

/// Malformed model document. The message names the offending field or the
/// line/column of a syntax error.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a model document (JSON). Duplicate atoms are merged and
/// near-normalized distributions rescaled; invariants are left to validate().
TabularRMDP parse_model(const std::string& text);
TabularRMDP load_model(const std::filesystem::path& path);

std::string serialize_model(const TabularRMDP& model);
void save_model(const TabularRMDP& model, const std::filesystem::path& path);

/// q-table as a JSON document {"n_states", "n_actions", "q": [[...], ...]}.
std::string serialize_q(const QFunction& q);

}  // namespace robustq
