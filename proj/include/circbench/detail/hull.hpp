#pragma once

#include <vector>

#include "circbench/ir.hpp"

namespace circbench::detail {

/// Closed hull of a disjunction over the linear forms shared by all of its
/// branches: each form is scaled to a leading coefficient of 1 and bounded
/// by the loosest bound any branch gives it.
std::vector<ir::LinearConstraint> hull_rows(const ir::Disjunction& d);

}  // namespace circbench::detail
