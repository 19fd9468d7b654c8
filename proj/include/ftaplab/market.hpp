#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ftaplab/calculus.hpp"
#include "ftaplab/tree.hpp"

namespace ftaplab {

struct MarketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// d-dimensional discounted market on a scenario tree. Per-node constraint
/// cones are finitely generated; an empty generator list means unconstrained
/// (all of d-space, encoded by +-unit rays on demand), and a single zero ray
/// encodes the no-trading cone {0}. The admissibility floor lambda defaults
/// to 1.
struct MarketModel {
    const ScenarioTree* tree = nullptr;
    std::vector<AdaptedProcess> S;
    std::vector<Mat> cones;  // per node; empty entry = unconstrained
    Rational lambda = 1;
    std::shared_ptr<const ScenarioTree> owned;  // keepalive for trees built on the fly

    MarketModel() = default;
    explicit MarketModel(const ScenarioTree& t, int dim)
        : tree(&t), S(dim, AdaptedProcess(t)), cones(t.size()) {}

    int dim() const { return int(S.size()); }
    /// Generators at a node, with the unconstrained default materialized.
    Mat cone_at(int node) const;
    void validate() const;
};

/// The +-unit rays spanning all of d-space.
Mat full_cone(int dim);

struct WealthProcess {
    std::vector<PredictableControl> strategy;  // one control per asset
    AdaptedProcess wealth;                     // (phi . S), zero at the root
    bool admissible = false;                   // wealth >= -lambda everywhere
};

/// Integrates phi against S; throws MarketError naming the first node whose
/// position leaves its cone.
WealthProcess wealth(const MarketModel& model, const std::vector<PredictableControl>& phi);

enum class CertificateKind { NAViolation, NUPBRViolation };

struct ArbitrageCertificate {
    CertificateKind kind;
    std::vector<PredictableControl> strategy;
    TerminalVariable terminal;
    AdaptedProcess wealth_path;
};

struct ArbitrageCheck {
    bool holds = false;
    ArbitrageCertificate certificate;  // meaningful when !holds
};

/// Recomputes the certificate's wealth and verifies its defining
/// inequalities; throws MarketError if anything fails.
void verify_certificate(const MarketModel& model, const ArbitrageCertificate& cert);

ArbitrageCheck check_NA(const MarketModel& model);
ArbitrageCheck check_NUPBR(const MarketModel& model);
/// NA and NUPBR conjunction, cross-checked against the separating-measure
/// LP; a disagreement between the two routes throws MarketError.
ArbitrageCheck check_NFLVR(const MarketModel& model);

/// Vertex/ray description of the terminal wealth polyhedron
/// {(phi.S)_T : phi cone-constrained, wealth >= -lambda}. When the
/// Fourier-Motzkin projection or the enumeration exceeds its budget only the
/// implicit flag is set and the lists stay empty.
struct TerminalPolyhedron {
    bool explicit_form = false;
    std::vector<TerminalVariable> vertices;
    std::vector<TerminalVariable> rays;
    Mat A;  // projected H-representation A y <= b in leaf coordinates
    Vec b;
};

TerminalPolyhedron terminal_cone_generators(const MarketModel& model);

struct MaximalElement {
    TerminalVariable h0;
    std::vector<PredictableControl> strategy;
};

/// Maximizes E[g] over terminal wealths g >= f in the polyhedron. Since all
/// atom weights are strictly positive the optimizer is pointwise maximal.
/// Throws MarketError when no element dominates f or when the model admits
/// unbounded dominating wealth (arbitrage).
MaximalElement maximal_element(const MarketModel& model, const TerminalVariable& f);

/// Re-invests the wealth of X at time t into the strictly positive Xtilde on
/// the union of time-t subtrees A; both inputs and the result are read in
/// 1 + X form (value processes V = 1 + wealth).
WealthProcess fork_concatenate(const MarketModel& model, const WealthProcess& X,
                               const WealthProcess& Xtilde, int t, const std::vector<int>& A);

/// Z = (H . X.wealth) + (G . Y.wealth) for nonnegative controls with
/// cellwise H G = 0; the combined strategy is H phi_X + G phi_Y.
WealthProcess concatenate(const MarketModel& model, const PredictableControl& H,
                          const PredictableControl& G, const WealthProcess& X,
                          const WealthProcess& Y);

}  // namespace ftaplab
