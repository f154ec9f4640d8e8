// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace scion {

/// Shortest decimal text that parses back to exactly `v` ("nan", "inf",
/// "-inf" for non-finite values).
std::string format_double(double v);

/// Inverse of format_double. Throws std::invalid_argument naming `what`
/// when the whole token is not a number.
double parse_double(std::string_view text, std::string_view what = "number");
long long parse_int(std::string_view text, std::string_view what = "integer");

}  // namespace scion
