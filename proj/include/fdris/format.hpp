// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace fdris {

/// Shortest-exact decimal text for a double (17 significant digits), so CSV
/// values re-parse to the identical bit pattern.
std::string format_number(double x);

}  // namespace fdris
