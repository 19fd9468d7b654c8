#pragma once

#include <vector>

#include "ftaplab/tree.hpp"

namespace ftaplab {

/// X - X0 = B + M + Xcheck with a jump threshold C: Xcheck collects the jumps
/// with |dX| > C and (B, M) is the Doob decomposition of the remainder.
/// B is predictable with |dB| <= C, M is a martingale with |dM| <= 2C.
struct Decomposition {
    Rational threshold;
    AdaptedProcess B;
    AdaptedProcess M;
    AdaptedProcess Xcheck;
};

/// Elementary integral (H . X)_t = sum_{s<=t} H_s (X_s - X_{s-1}), zero at 0.
AdaptedProcess stochastic_integral(const PredictableControl& h, const AdaptedProcess& x);

/// X = X0 + M + B with dB_t = E[dX_t | F_{t-1}] predictable and M a
/// martingale started at 0. Exact and unique in discrete time.
struct DoobParts {
    AdaptedProcess M;
    AdaptedProcess B;
};
DoobParts doob_decomposition(const AdaptedProcess& x);

Decomposition big_jump_split(const AdaptedProcess& x, const Rational& threshold);

/// A positive C avoiding every jump magnitude of the given processes:
/// midpoint of the tighter gap around the median distinct magnitude,
/// half the unique magnitude, or 1 when there are no jumps.
Rational jump_threshold(const std::vector<const AdaptedProcess*>& xs);
Rational jump_threshold(const AdaptedProcess& x);

enum class VariationKind { Total, Quadratic };
AdaptedProcess variation(const AdaptedProcess& x, VariationKind kind);

/// [X,Y]_t = sum_{s<=t} dX_s dY_s.
AdaptedProcess covariation(const AdaptedProcess& x, const AdaptedProcess& y);

/// The three terms of UV - U0 V0 = (U_- . V) + (V_- . U) + [U,V].
struct IntegrationByParts {
    AdaptedProcess u_minus_dv;
    AdaptedProcess v_minus_du;
    AdaptedProcess bracket;
};
IntegrationByParts integration_by_parts(const AdaptedProcess& u, const AdaptedProcess& v);

/// Cadlag modulus w'(f, delta) of a step path on the grid {0, 1/T, ..., 1}:
/// exact infimum over grid partitions with cell length >= delta of the
/// maximal within-cell oscillation (cells half-open, last cell closed at 1).
Rational cadlag_modulus(const Vec& path, const Rational& delta);

/// T_0 = 0, T_{i+1} = first time |N_t - N_{T_i}| >= eps after T_i, pathwise.
/// The list ends when no path triggers the next threshold.
std::vector<StoppingTime> slicing_times(const AdaptedProcess& n, const Rational& eps);

}  // namespace ftaplab
