#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftaplab/calculus.hpp"
#include "ftaplab/market.hpp"
#include "ftaplab/metrics.hpp"
#include "ftaplab/tree.hpp"

namespace ftaplab {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentReport {
    struct Violation {
        std::uint64_t seed = 0;
        std::string what;
        Rational slack = 0;  // negative margin of the broken inequality
    };

    std::string name;
    long instances = 0;
    std::vector<Violation> violations;
    Rational worst = 0;  // worst (smallest) margin or ratio seen, per check
    bool skipped = false;
    std::string note;

    bool pass() const { return !skipped && violations.empty(); }
    void violation(std::uint64_t seed, const std::string& what, const Rational& slack) {
        violations.push_back({seed, what, slack});
    }
};

/// a P[|(H.S)|* >= a] <= 9 E[S_0] for a nonnegative supermartingale S and
/// each |H| <= 1 candidate; `worst` carries the largest ratio a P / E[S_0].
ExperimentReport check_burkholder_supermartingale(const AdaptedProcess& s,
                                                  const std::vector<PredictableControl>& hs,
                                                  const Vec& a_grid);

/// a P[|(H.M)|* >= a] <= 18 E[|M_T|] for a martingale M.
ExperimentReport check_burkholder_martingale(const AdaptedProcess& m,
                                             const std::vector<PredictableControl>& hs,
                                             const Vec& a_grid);

/// For 0 <= Z <= a supermartingale, write Z = M - A with M a martingale
/// started at Z_0 and A predictable increasing from 0, and check
/// E[A_T^2] <= E[M_T^2] <= 2 a E[Z_0] exactly.
ExperimentReport check_doob_meyer_bound(const AdaptedProcess& z, const Rational& a);

/// Deflates a sequence of 1-admissible wealth processes by the numeraire
/// deflator, checks the integration-by-parts identity
/// 1 + X = (1/D)_- . Z + Z_- . (1/D) + [1/D, Z] with zero residual, and the
/// deflated tail bound sup_H P[|(H.Z)|* >= a] <= 9/a on the grid.
ExperimentReport experiment_nupbr_put(const MarketModel& model,
                                      const std::vector<WealthProcess>& xs, const Vec& a_grid);

/// Memin-Slominski trend: under a shared big-jump threshold, the M-part
/// Emery upper bound, the B-part ucp distance and the expected TV of the
/// Xcheck difference must all fall below the tolerance at the last index.
ExperimentReport experiment_memin_slominski(const std::vector<AdaptedProcess>& xs,
                                            const AdaptedProcess& x, const Rational& tolerance);

/// Emery convergence toward a limit whose terminal value must be maximal;
/// a strictly dominating element is reported as the counterexample when not.
ExperimentReport experiment_emery_convergence(const MarketModel& model,
                                              const std::vector<AdaptedProcess>& xs,
                                              const AdaptedProcess& x, const Rational& tolerance);

/// P-UT characterization: the profile of the family is compared with the
/// total-variation tails of its big-jump parts, and the quantile route is
/// linked by the union bound profile(q1+q2+q3+1) <= 3 eta.
ExperimentReport check_put_characterization(const std::vector<const AdaptedProcess*>& family,
                                            const Vec& a_grid, const Rational& eta);

/// Slicing lemma: for a martingale with |dN| <= eps and
/// P[|N|* >= 1] >= 6 alpha, each of the first floor(alpha/(2 eps)) slice
/// increments drops below -alpha eps with probability >= alpha. Hypothesis
/// failures are reported as skipped, not failed.
ExperimentReport check_slicing_lemma(const AdaptedProcess& n, const Rational& eps,
                                     const Rational& alpha);

/// Integral stability: profile of (H_- . S) at C k is bounded by the profile
/// of S at C plus the tail P[|H|* > k], on the product grid.
ExperimentReport check_put_integral_stability(const std::vector<const AdaptedProcess*>& s_family,
                                              const std::vector<const AdaptedProcess*>& h_family,
                                              const Vec& c_grid, const Vec& k_grid);

/// Renders a report as stable line-oriented text.
std::string format_report(const ExperimentReport& r);

}  // namespace ftaplab
