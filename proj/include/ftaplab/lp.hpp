#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "ftaplab/rational.hpp"

namespace ftaplab::lp {

struct LpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Status { Optimal, Infeasible, Unbounded };

/// Canonical form: maximize c.x subject to A x <= b, x >= 0.
struct Problem {
    Mat A;
    Vec b;
    Vec c;
};

struct Solution {
    Status status = Status::Infeasible;
    Rational objective = 0;
    Vec x;     // Optimal: a maximizer
    Vec dual;  // Optimal: y >= 0 with y A >= c and y b = objective.
               // Infeasible: Farkas certificate y >= 0, y A >= 0, y b < 0.
    Vec ray;   // Unbounded: d >= 0, A d <= 0, c d > 0 (x holds a feasible point).
};

/// Exact rational simplex, Bland's rule, two phases. Certificates are
/// verified by substitution before returning.
Solution solve(const Problem& p);

/// Front end for general problems: free or nonnegative variables, rows of
/// any sense. Translates to canonical form (free variables split) and maps
/// solutions back.
class Builder {
public:
    int add_var(bool nonneg = true);
    void add_le(const std::map<int, Rational>& coef, const Rational& rhs);
    void add_ge(const std::map<int, Rational>& coef, const Rational& rhs);
    void add_eq(const std::map<int, Rational>& coef, const Rational& rhs);
    void set_objective(const std::map<int, Rational>& coef);  // maximized

    Solution solve() const;  // x/ray are reported in original variables

private:
    struct Row {
        std::map<int, Rational> coef;
        Rational rhs;
        int sense;  // -1: <=, 0: ==, +1: >=
    };
    std::vector<bool> nonneg_;
    std::vector<Row> rows_;
    std::map<int, Rational> objective_;
};

}  // namespace ftaplab::lp
