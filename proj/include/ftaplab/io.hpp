#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ftaplab/market.hpp"
#include "ftaplab/tree.hpp"

namespace ftaplab {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// In-memory form of a TREE 1 file: the tree, named multi-component adapted
/// processes, and optional per-node cone generators.
struct TreeFile {
    std::shared_ptr<ScenarioTree> tree;
    struct Proc {
        std::string name;
        std::vector<AdaptedProcess> comps;
    };
    std::vector<Proc> procs;
    std::vector<Mat> cones;  // per node, empty = unconstrained

    const Proc* find(const std::string& name) const;
};

/// Line-oriented text format:
///   FTAPLAB TREE 1
///   node <id> <parent-id|-> <p/q>
///   proc <name> <dim> <node-id> <v1> ... <vdim>
///   cone <node-id> <c1> ... <cd>
/// Rationals are canonical p/q with q >= 1 and gcd 1; ids are dense and
/// increasing; `#` starts a comment line. Errors carry line numbers.
TreeFile parse_tree_file(const std::string& text);
std::string render_tree_file(const TreeFile& f);

/// Builds a market from the named price process (lambda defaults to 1).
MarketModel to_market(const TreeFile& f, const std::string& price_name = "S",
                      const Rational& lambda = 1);

struct GenParams {
    std::uint64_t seed = 0;
    int depth = 2;
    int branching = 2;  // maximum fan-out, minimum 2
    int dim = 1;
    int price_range = 4;              // increments drawn from {-r..r}/2
    int constraint_density = 0;       // percent of nodes given a restricted cone
    bool emm_first = false;           // prices built as Q-martingales
};

/// Deterministic seeded model; emm_first guarantees a separating measure by
/// construction, the free-price variant may or may not admit arbitrage.
TreeFile generate_random_model(const GenParams& params);

struct ReportRow {
    std::string name;
    std::uint64_t seed = 0;
    bool pass = false;
    Rational worst_slack = 0;
};

/// Writes <base>.report.txt (the human text as given) and <base>.report.tsv
/// (name, seed, pass, worst-slack).
void write_reports(const std::string& base, const std::string& human_text,
                   const std::vector<ReportRow>& rows);

}  // namespace ftaplab
