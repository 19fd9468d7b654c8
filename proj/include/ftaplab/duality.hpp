#pragma once

#include <string>
#include <vector>

#include "ftaplab/market.hpp"
#include "ftaplab/tree.hpp"

namespace ftaplab {

struct DualityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Equivalent separating measure in density form: Z > 0 on every leaf,
/// E_p[Z] = 1, and E_Q of every one-step cone gain is nonpositive.
struct SeparatingMeasure {
    TerminalVariable density;  // dQ/dP per leaf
    Vec q_probs;               // Q of each leaf, in leaf order
};

struct EsmResult {
    bool exists = false;
    SeparatingMeasure measure;   // when exists
    Rational min_ratio = 0;     // max-min q/p attained by the LP
    ArbitrageCertificate free_lunch;  // when not: a scalable or plain arbitrage
};

/// Max-min-ratio LP over leaf measures with the nodewise separating
/// constraints; a measure is returned iff the optimum is strictly positive.
EsmResult esm_exists(const MarketModel& model);

/// Exact check of the SeparatingMeasure invariants; throws on violation.
void verify_separating_measure(const MarketModel& model, const SeparatingMeasure& m);

struct KrepsYanResult {
    bool success = false;
    SeparatingMeasure measure;
    Vec atom_optima;      // per-atom LP values, leaf order
    int failed_atom = -1;  // leaf index whose optimum was 0 (or -1)
    bool infeasible = false;  // no nonnegative normalized separator at all
};

/// The appendix construction run literally on the finite atom family: one LP
/// per atom maximizing the density there, combined with weights 2^-i and
/// renormalized. Fails with the first atom whose optimum is zero.
KrepsYanResult kreps_yan_construct(const MarketModel& model);

struct Deflator {
    AdaptedProcess D;
    std::vector<PredictableControl> numeraire_strategy;  // per-node fractions
    bool strategy_certified = false;  // strategy solves the log problem exactly
};

struct DeflatorReport {
    bool ok = false;
    std::vector<std::string> violations;
    Rational worst_slack = 0;  // most negative margin seen (0 when clean)
};

/// Supermartingale deflator under NUPBR. The log-optimal fractions are found
/// by floating-point ascent and certified exactly; nodes where certification
/// fails (irrational optimum) fall back to the one-period density LP, which
/// yields an exact deflator without a certified strategy.
Deflator numeraire_deflator(const MarketModel& model);

DeflatorReport verify_deflator(const MarketModel& model, const Deflator& d);

}  // namespace ftaplab
