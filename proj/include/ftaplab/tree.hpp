#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ftaplab/rational.hpp"

namespace ftaplab {

struct TreeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite filtered probability space as a rooted scenario tree. Nodes at
/// depth t are the atoms of F_t; every conditional probability is a strictly
/// positive rational and siblings sum to one, so the measure has full support.
class ScenarioTree {
public:
    struct Node {
        int parent = -1;  // -1 for the root
        int time = 0;
        Rational cond_prob = 1;
        std::vector<int> children;
    };

    // Incremental construction; finalize() validates all invariants.
    int add_root();
    int add_child(int parent, const Rational& cond_prob);
    void finalize();

    int size() const { return int(nodes_.size()); }
    int horizon() const { return horizon_; }
    const Node& node(int i) const { return nodes_[i]; }
    int parent(int i) const { return nodes_[i].parent; }
    int time(int i) const { return nodes_[i].time; }
    const std::vector<int>& children(int i) const { return nodes_[i].children; }
    bool is_leaf(int i) const { return nodes_[i].time == horizon_; }

    /// Unconditional probability of the atom at node i.
    const Rational& prob(int i) const { return prob_[i]; }
    const std::vector<int>& leaves() const { return leaves_; }
    const std::vector<int>& nodes_at(int t) const { return by_time_.at(t); }
    /// Position of a leaf node in leaves(), -1 for non-leaves.
    int leaf_index(int i) const { return leaf_index_[i]; }

    bool same_as(const ScenarioTree& other) const;

    /// T-period tree with `branching` children per node and the given
    /// conditional probabilities (cycled if fewer than `branching`).
    static ScenarioTree uniform(int horizon, int branching);
    static ScenarioTree binary(int horizon, const Rational& p_up);

private:
    std::vector<Node> nodes_;
    std::vector<Rational> prob_;
    std::vector<int> leaves_;
    std::vector<int> leaf_index_;
    std::vector<std::vector<int>> by_time_;
    int horizon_ = 0;
    bool finalized_ = false;
    void require_finalized() const;
};

/// Scalar adapted process: one rational per node.
struct AdaptedProcess {
    const ScenarioTree* tree = nullptr;
    Vec v;

    AdaptedProcess() = default;
    explicit AdaptedProcess(const ScenarioTree& t, Rational fill = 0)
        : tree(&t), v(t.size(), std::move(fill)) {}

    const Rational& at(int node) const { return v[node]; }
    Rational& at(int node) { return v[node]; }
    /// Increment over the step into `node`; zero at the root.
    Rational delta(int node) const {
        int p = tree->parent(node);
        return p < 0 ? Rational(0) : v[node] - v[p];
    }
};

AdaptedProcess operator+(const AdaptedProcess& a, const AdaptedProcess& b);
AdaptedProcess operator-(const AdaptedProcess& a, const AdaptedProcess& b);
AdaptedProcess operator*(const Rational& c, const AdaptedProcess& a);
bool operator==(const AdaptedProcess& a, const AdaptedProcess& b);

/// Scalar predictable control: the position held over (t-1, t], indexed by
/// the node at t-1. Entries at leaves are unused.
struct PredictableControl {
    const ScenarioTree* tree = nullptr;
    Vec v;

    PredictableControl() = default;
    explicit PredictableControl(const ScenarioTree& t, Rational fill = 0)
        : tree(&t), v(t.size(), std::move(fill)) {}

    const Rational& at(int node) const { return v[node]; }
    Rational& at(int node) { return v[node]; }
};

/// Terminal (F_T-measurable) variable: one rational per leaf, in leaf order.
struct TerminalVariable {
    const ScenarioTree* tree = nullptr;
    Vec v;

    TerminalVariable() = default;
    explicit TerminalVariable(const ScenarioTree& t, Rational fill = 0)
        : tree(&t), v(t.leaves().size(), std::move(fill)) {}

    const Rational& at_leaf(int k) const { return v[k]; }
    Rational& at_leaf(int k) { return v[k]; }
};

TerminalVariable terminal_of(const AdaptedProcess& x);
Rational expectation(const TerminalVariable& xi);

/// First-entry stopping time: tau = first time the path enters stop_set,
/// else infinity (encoded as horizon + 1).
struct StoppingTime {
    const ScenarioTree* tree = nullptr;
    std::vector<char> in_set;  // per node

    StoppingTime() = default;
    explicit StoppingTime(const ScenarioTree& t) : tree(&t), in_set(t.size(), 0) {}

    /// First node on the root path of `node` that lies in the stop set, or -1.
    int first_hit(int node) const;
    /// tau on the path through `leaf_node`; horizon+1 means "never".
    int value_on_path(int leaf_node) const;
    bool empty() const;
};

/// E[xi | F_t] for every t, as an adapted process.
AdaptedProcess conditional_expectation(const TerminalVariable& xi);
/// The time-t slice, one value per node of tree.nodes_at(t).
Vec conditional_expectation_at(const TerminalVariable& xi, int t);

AdaptedProcess stopped_process(const AdaptedProcess& x, const StoppingTime& tau);

inline void require_same_tree(const ScenarioTree* a, const ScenarioTree* b) {
    if (a == nullptr || b == nullptr || !a->same_as(*b)) throw TreeError("processes live on different trees");
}

}  // namespace ftaplab
