#pragma once

#include <string>

namespace fixture {

/// Reference lexical check written from the XSD grammar as regular
/// expressions, plus a separate day-of-month check. Kept deliberately
/// different from the library's scanners so the two can be compared.
bool oracle_lexical_valid(const std::string& value, const std::string& datatype);

}  // namespace fixture
