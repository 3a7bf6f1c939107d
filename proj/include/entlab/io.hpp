#pragma once

// JSON operator files: {"labels": [...], "dims": [...], "re": [[...]], "im": [[...]]},
// row-major nested arrays.

#include <string>

#include "entlab/layout.hpp"
#include "json.hpp"

namespace entlab {

using Json = nlohmann::ordered_json;

Json operator_to_json(const LabeledOperator& op);
/// Throws ContractViolation naming the offending field on malformed input.
LabeledOperator operator_from_json(const Json& j, bool require_hermitian = true);

LabeledOperator read_operator(const std::string& path, bool require_hermitian = true);
void write_json(const std::string& path, const Json& j);

/// 64-bit FNV-1a digest of a string, as 16 hex digits.
std::string digest_hex(const std::string& data);

}  // namespace entlab
