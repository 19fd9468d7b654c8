#include "ftaplab/tree.hpp"

#include <algorithm>

namespace ftaplab {

int ScenarioTree::add_root() {
    if (!nodes_.empty()) throw TreeError("tree already has a root");
    nodes_.push_back(Node{});
    return 0;
}

int ScenarioTree::add_child(int parent, const Rational& cond_prob) {
    if (parent < 0 || parent >= int(nodes_.size())) throw TreeError("unknown parent node");
    if (cond_prob <= 0) throw TreeError("conditional probability must be strictly positive");
    Node n;
    n.parent = parent;
    n.time = nodes_[parent].time + 1;
    n.cond_prob = cond_prob;
    int id = int(nodes_.size());
    nodes_.push_back(std::move(n));
    nodes_[parent].children.push_back(id);
    return id;
}

void ScenarioTree::finalize() {
    if (nodes_.empty()) throw TreeError("empty tree");
    // horizon 0 (a single node) is allowed: a trivial but valid space
    horizon_ = 0;
    for (const auto& n : nodes_) horizon_ = std::max(horizon_, n.time);

    prob_.assign(nodes_.size(), Rational(0));
    prob_[0] = 1;
    for (int i = 1; i < int(nodes_.size()); ++i) prob_[i] = prob_[nodes_[i].parent] * nodes_[i].cond_prob;

    by_time_.assign(horizon_ + 1, {});
    leaves_.clear();
    leaf_index_.assign(nodes_.size(), -1);
    Rational leaf_total = 0;
    for (int i = 0; i < int(nodes_.size()); ++i) {
        by_time_[nodes_[i].time].push_back(i);
        if (nodes_[i].children.empty()) {
            // every path must run to the horizon
            if (nodes_[i].time != horizon_) throw TreeError("path ends before the horizon at node " + std::to_string(i));
            leaf_index_[i] = int(leaves_.size());
            leaves_.push_back(i);
            leaf_total += prob_[i];
        } else {
            Rational s = 0;
            for (int c : nodes_[i].children) s += nodes_[c].cond_prob;
            if (s != 1) throw TreeError("sibling probabilities under node " + std::to_string(i) + " sum to " + rat_str(s));
        }
    }
    if (leaf_total != 1) throw TreeError("leaf probabilities sum to " + rat_str(leaf_total));
    finalized_ = true;
}

void ScenarioTree::require_finalized() const {
    if (!finalized_) throw TreeError("tree not finalized");
}

bool ScenarioTree::same_as(const ScenarioTree& other) const {
    if (this == &other) return true;
    if (nodes_.size() != other.nodes_.size() || horizon_ != other.horizon_) return false;
    for (int i = 0; i < int(nodes_.size()); ++i) {
        if (nodes_[i].parent != other.nodes_[i].parent || nodes_[i].cond_prob != other.nodes_[i].cond_prob) return false;
    }
    return true;
}

ScenarioTree ScenarioTree::uniform(int horizon, int branching) {
    ScenarioTree t;
    t.add_root();
    std::vector<int> frontier{0};
    Rational p(1, branching);
    for (int s = 0; s < horizon; ++s) {
        std::vector<int> next;
        for (int n : frontier)
            for (int b = 0; b < branching; ++b) next.push_back(t.add_child(n, p));
        frontier = std::move(next);
    }
    t.finalize();
    return t;
}

ScenarioTree ScenarioTree::binary(int horizon, const Rational& p_up) {
    ScenarioTree t;
    t.add_root();
    std::vector<int> frontier{0};
    for (int s = 0; s < horizon; ++s) {
        std::vector<int> next;
        for (int n : frontier) {
            next.push_back(t.add_child(n, p_up));
            next.push_back(t.add_child(n, Rational(1) - p_up));
        }
        frontier = std::move(next);
    }
    t.finalize();
    return t;
}

AdaptedProcess operator+(const AdaptedProcess& a, const AdaptedProcess& b) {
    require_same_tree(a.tree, b.tree);
    AdaptedProcess r(*a.tree);
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = a.v[i] + b.v[i];
    return r;
}

AdaptedProcess operator-(const AdaptedProcess& a, const AdaptedProcess& b) {
    require_same_tree(a.tree, b.tree);
    AdaptedProcess r(*a.tree);
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = a.v[i] - b.v[i];
    return r;
}

AdaptedProcess operator*(const Rational& c, const AdaptedProcess& a) {
    AdaptedProcess r(*a.tree);
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] = c * a.v[i];
    return r;
}

bool operator==(const AdaptedProcess& a, const AdaptedProcess& b) {
    return a.tree && b.tree && a.tree->same_as(*b.tree) && a.v == b.v;
}

TerminalVariable terminal_of(const AdaptedProcess& x) {
    TerminalVariable xi(*x.tree);
    const auto& leaves = x.tree->leaves();
    for (size_t k = 0; k < leaves.size(); ++k) xi.v[k] = x.v[leaves[k]];
    return xi;
}

Rational expectation(const TerminalVariable& xi) {
    Rational s = 0;
    const auto& leaves = xi.tree->leaves();
    for (size_t k = 0; k < leaves.size(); ++k) s += xi.tree->prob(leaves[k]) * xi.v[k];
    return s;
}

int StoppingTime::first_hit(int node) const {
    // walk up, remember the earliest hit
    int hit = -1;
    for (int n = node; n >= 0; n = tree->parent(n))
        if (in_set[n]) hit = n;
    return hit;
}

int StoppingTime::value_on_path(int leaf_node) const {
    int h = first_hit(leaf_node);
    return h < 0 ? tree->horizon() + 1 : tree->time(h);
}

bool StoppingTime::empty() const {
    return std::none_of(in_set.begin(), in_set.end(), [](char c) { return c != 0; });
}

AdaptedProcess conditional_expectation(const TerminalVariable& xi) {
    const ScenarioTree& t = *xi.tree;
    AdaptedProcess e(t);
    // backward induction from the leaves
    for (int s = t.horizon(); s >= 0; --s) {
        for (int n : t.nodes_at(s)) {
            if (t.is_leaf(n)) {
                e.v[n] = xi.v[t.leaf_index(n)];
            } else {
                Rational acc = 0;
                for (int c : t.children(n)) acc += t.node(c).cond_prob * e.v[c];
                e.v[n] = acc;
            }
        }
    }
    return e;
}

Vec conditional_expectation_at(const TerminalVariable& xi, int t) {
    const ScenarioTree& tree = *xi.tree;
    if (t < 0 || t > tree.horizon()) throw TreeError("conditioning time out of range");
    AdaptedProcess e = conditional_expectation(xi);
    Vec out;
    for (int n : tree.nodes_at(t)) out.push_back(e.v[n]);
    return out;
}

AdaptedProcess stopped_process(const AdaptedProcess& x, const StoppingTime& tau) {
    require_same_tree(x.tree, tau.tree);
    const ScenarioTree& t = *x.tree;
    AdaptedProcess r(t);
    // top-down: once the path has entered the stop set, the value freezes
    std::vector<int> frozen_at(t.size(), -1);
    for (int i = 0; i < t.size(); ++i) {
        int p = t.parent(i);
        int f = (p < 0) ? -1 : frozen_at[p];
        if (f < 0 && tau.in_set[i]) f = i;
        frozen_at[i] = f;
        r.v[i] = (f >= 0) ? x.v[f] : x.v[i];
    }
    return r;
}

}  // namespace ftaplab
