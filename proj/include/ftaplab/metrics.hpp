#pragma once

#include <vector>

#include "ftaplab/calculus.hpp"
#include "ftaplab/tree.hpp"

namespace ftaplab {

enum class BoundMethod { VertexEnumeration, GridCertified };

/// Certified bracket for a supremum-type distance: `value` is a lower bound
/// attained by an explicit candidate, `value + error_bound` an upper bound.
struct DistanceResult {
    Rational value = 0;
    Rational error_bound = 0;
    BoundMethod method = BoundMethod::VertexEnumeration;

    Rational upper() const { return value + error_bound; }
};

/// Exact E[ sup_t |X_t - Y_t| ^ 1 ].
Rational ucp_distance(const AdaptedProcess& x, const AdaptedProcess& y);

/// Emery distance sup_{|K|<=1} E[ |(K.(X-Y))|* ^ 1 ]. The objective is
/// piecewise linear but not concave, so the result is a certified bracket:
/// sign vertices (and K=0, K=1) give the lower bound; E[TV(X-Y)] and, when
/// the budget allows, a Lipschitz grid sweep give the upper bound within eps.
DistanceResult emery_distance(const AdaptedProcess& x, const AdaptedProcess& y, const Rational& eps);

/// Smallest a with P[|xi| > a] <= eta for every member of the family.
Rational l0_quantile(const std::vector<TerminalVariable>& family, const Rational& eta);

struct PUTProfile {
    Vec a_grid;
    Vec values;  // sup over H, n of the tail probability, per grid point
    int family_size = 0;
    bool lower_bound_only = false;  // enumeration budget hit; values are lower bounds
};

/// Terminal-value profile: per a, the exact sup over the family and over
/// cell-wise |H| <= 1 of P[|(H.X^n)_T| >= a]. Branch-and-bound over leaf
/// sign assignments with LP feasibility checks.
PUTProfile put_profile(const std::vector<const AdaptedProcess*>& family, const Vec& a_grid,
                       long budget = 200000);

/// Running-supremum variant with P[|(H.X^n)|* >= a]; witnesses may sit at
/// any non-root node, so it dominates put_profile pointwise.
PUTProfile put_profile_sup(const std::vector<const AdaptedProcess*>& family, const Vec& a_grid,
                           long budget = 200000);

}  // namespace ftaplab
