#include "ftaplab/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace ftaplab {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

Rational parse_rat(const std::string& s, int line) {
    auto r = rat_parse(s);
    if (!r) fail(line, "non-canonical rational '" + s + "'");
    return *r;
}

long parse_id(const std::string& s, int line) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail(line, "bad node id '" + s + "'");
    return std::stol(s);
}

}  // namespace

const TreeFile::Proc* TreeFile::find(const std::string& name) const {
    for (const Proc& p : procs)
        if (p.name == name) return &p;
    return nullptr;
}

TreeFile parse_tree_file(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false;

    struct NodeLine {
        long parent;
        Rational prob;
        int line;
    };
    std::vector<NodeLine> node_lines;
    struct ProcLine {
        std::string name;
        int dim;
        long node;
        Vec vals;
        int line;
    };
    std::vector<ProcLine> proc_lines;
    struct ConeLine {
        long node;
        Vec ray;
        int line;
    };
    std::vector<ConeLine> cone_lines;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tok = tokens(line);
        if (tok.empty()) continue;
        if (!header_seen) {
            if (tok.size() != 3 || tok[0] != "FTAPLAB" || tok[1] != "TREE" || tok[2] != "1")
                fail(lineno, "bad header, expected 'FTAPLAB TREE 1'");
            header_seen = true;
            continue;
        }
        if (tok[0] == "node") {
            if (tok.size() != 4) fail(lineno, "node line needs id, parent and probability");
            long id = parse_id(tok[1], lineno);
            if (id != long(node_lines.size()))
                fail(lineno, "node ids must be dense and increasing (got " + tok[1] + ", expected " +
                                 std::to_string(node_lines.size()) + ")");
            long parent;
            if (tok[2] == "-") {
                if (id != 0) fail(lineno, "only node 0 may be the root");
                parent = -1;
            } else {
                parent = parse_id(tok[2], lineno);
                if (parent >= id) fail(lineno, "parent must precede child (orphan node)");
            }
            Rational p = parse_rat(tok[3], lineno);
            if (id == 0 && p != 1) fail(lineno, "root probability must be 1/1");
            if (p <= 0) fail(lineno, "conditional probability must be positive");
            node_lines.push_back({parent, p, lineno});
        } else if (tok[0] == "proc") {
            if (tok.size() < 5) fail(lineno, "proc line needs name, dim, node and values");
            int dim = int(parse_id(tok[2], lineno));
            if (dim < 1) fail(lineno, "process dimension must be positive");
            if (int(tok.size()) != 4 + dim) fail(lineno, "expected " + std::to_string(dim) + " values");
            ProcLine pl{tok[1], dim, parse_id(tok[3], lineno), {}, lineno};
            for (int k = 0; k < dim; ++k) pl.vals.push_back(parse_rat(tok[4 + k], lineno));
            proc_lines.push_back(std::move(pl));
        } else if (tok[0] == "cone") {
            if (tok.size() < 3) fail(lineno, "cone line needs a node and ray components");
            ConeLine cl{parse_id(tok[1], lineno), {}, lineno};
            for (size_t k = 2; k < tok.size(); ++k) cl.ray.push_back(parse_rat(tok[k], lineno));
            cone_lines.push_back(std::move(cl));
        } else {
            fail(lineno, "unknown directive '" + tok[0] + "'");
        }
    }
    if (!header_seen) fail(lineno, "missing header");
    if (node_lines.empty()) fail(lineno, "no nodes");

    // sibling sums checked here so the error points at the parent's line
    std::map<long, Rational> child_sum;
    for (size_t i = 1; i < node_lines.size(); ++i) child_sum[node_lines[i].parent] += node_lines[i].prob;
    for (const auto& [parent, sum] : child_sum)
        if (sum != 1)
            fail(node_lines[size_t(parent)].line,
                 "sibling probabilities under node " + std::to_string(parent) + " sum to " + rat_str(sum));

    TreeFile out;
    out.tree = std::make_shared<ScenarioTree>();
    out.tree->add_root();
    for (size_t i = 1; i < node_lines.size(); ++i)
        out.tree->add_child(int(node_lines[i].parent), node_lines[i].prob);
    try {
        out.tree->finalize();
    } catch (const TreeError& e) {
        fail(node_lines.front().line, e.what());
    }
    const ScenarioTree& t = *out.tree;

    std::map<std::string, size_t> proc_index;
    std::vector<std::vector<char>> covered;
    for (const ProcLine& pl : proc_lines) {
        auto it = proc_index.find(pl.name);
        if (it == proc_index.end()) {
            proc_index[pl.name] = out.procs.size();
            out.procs.push_back({pl.name, std::vector<AdaptedProcess>(pl.dim, AdaptedProcess(t))});
            covered.emplace_back(t.size(), 0);
            it = proc_index.find(pl.name);
        }
        TreeFile::Proc& p = out.procs[it->second];
        if (int(p.comps.size()) != pl.dim) fail(pl.line, "inconsistent dimension for process " + pl.name);
        if (pl.node < 0 || pl.node >= t.size()) fail(pl.line, "unknown node " + std::to_string(pl.node));
        if (covered[it->second][pl.node]) fail(pl.line, "duplicate value for process " + pl.name);
        covered[it->second][pl.node] = 1;
        for (int k = 0; k < pl.dim; ++k) p.comps[k].v[pl.node] = pl.vals[k];
    }
    for (size_t pi = 0; pi < out.procs.size(); ++pi)
        for (int i = 0; i < t.size(); ++i)
            if (!covered[pi][i])
                throw ParseError("process " + out.procs[pi].name + " misses node " + std::to_string(i));

    out.cones.assign(t.size(), {});
    for (const ConeLine& cl : cone_lines) {
        if (cl.node < 0 || cl.node >= t.size()) fail(cl.line, "unknown node " + std::to_string(cl.node));
        if (t.is_leaf(int(cl.node))) fail(cl.line, "cone at a leaf node");
        out.cones[cl.node].push_back(cl.ray);
    }
    return out;
}

std::string render_tree_file(const TreeFile& f) {
    const ScenarioTree& t = *f.tree;
    std::ostringstream out;
    out << "FTAPLAB TREE 1\n";
    for (int i = 0; i < t.size(); ++i) {
        out << "node " << i << " ";
        if (t.parent(i) < 0)
            out << "-";
        else
            out << t.parent(i);
        out << " " << rat_str(t.node(i).cond_prob) << "\n";
    }
    for (const TreeFile::Proc& p : f.procs)
        for (int i = 0; i < t.size(); ++i) {
            out << "proc " << p.name << " " << p.comps.size() << " " << i;
            for (const AdaptedProcess& c : p.comps) out << " " << rat_str(c.v[i]);
            out << "\n";
        }
    for (int u = 0; u < int(f.cones.size()); ++u)
        for (const Vec& ray : f.cones[u]) {
            out << "cone " << u;
            for (const Rational& x : ray) out << " " << rat_str(x);
            out << "\n";
        }
    return out.str();
}

MarketModel to_market(const TreeFile& f, const std::string& price_name, const Rational& lambda) {
    const TreeFile::Proc* p = f.find(price_name);
    if (p == nullptr) throw ParseError("no process named '" + price_name + "'");
    MarketModel m(*f.tree, int(p->comps.size()));
    m.S = p->comps;
    m.cones = f.cones;
    m.lambda = lambda;
    m.owned = f.tree;  // keep the tree alive past the TreeFile
    m.validate();
    return m;
}

TreeFile generate_random_model(const GenParams& gp) {
    if (gp.depth < 1 || gp.branching < 2 || gp.dim < 1 || gp.price_range < 1)
        throw ParseError("bad generator parameters");
    if (gp.constraint_density < 0 || gp.constraint_density > 100)
        throw ParseError("constraint density is a percentage");
    std::mt19937_64 rng(gp.seed);
    auto draw = [&](int lo, int hi) { return int(std::uniform_int_distribution<int>(lo, hi)(rng)); };

    TreeFile out;
    out.tree = std::make_shared<ScenarioTree>();
    ScenarioTree& t = *out.tree;
    t.add_root();
    std::vector<int> frontier{0};
    for (int s = 0; s < gp.depth; ++s) {
        std::vector<int> next;
        for (int n : frontier) {
            int fanout = draw(2, gp.branching);
            std::vector<int> w(fanout);
            int total = 0;
            for (int& x : w) {
                x = draw(1, 4);
                total += x;
            }
            for (int x : w) next.push_back(t.add_child(n, Rational(x, total)));
        }
        frontier = std::move(next);
    }
    t.finalize();

    TreeFile::Proc prices{"S", std::vector<AdaptedProcess>(gp.dim, AdaptedProcess(t))};
    // conditional Q weights for the emm-first variant, drawn nodewise
    Vec q_cond(t.size(), Rational(0));
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        int total = 0;
        std::vector<int> w(t.children(u).size());
        for (int& x : w) {
            x = draw(1, 4);
            total += x;
        }
        for (size_t c = 0; c < w.size(); ++c) q_cond[t.children(u)[c]] = Rational(w[c], total);
    }
    for (int k = 0; k < gp.dim; ++k) {
        prices.comps[k].v[0] = Rational(draw(1, gp.price_range));
        for (int u = 0; u < t.size(); ++u) {
            if (t.is_leaf(u)) continue;
            const std::vector<int>& ch = t.children(u);
            if (gp.emm_first) {
                Rational acc = 0;
                for (size_t c = 0; c + 1 < ch.size(); ++c) {
                    Rational inc(draw(-gp.price_range, gp.price_range), 2);
                    prices.comps[k].v[ch[c]] = prices.comps[k].v[u] + inc;
                    acc += q_cond[ch[c]] * inc;
                }
                // the last increment balances the martingale equation
                prices.comps[k].v[ch.back()] = prices.comps[k].v[u] - acc / q_cond[ch.back()];
            } else {
                for (int c : ch)
                    prices.comps[k].v[c] = prices.comps[k].v[u] + Rational(draw(-gp.price_range, gp.price_range), 2);
            }
        }
    }
    out.procs.push_back(std::move(prices));

    out.cones.assign(t.size(), {});
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        if (draw(0, 99) >= gp.constraint_density) continue;
        // a restricted cone: long-only, short-only, or a single random ray
        int kind = draw(0, 2);
        if (kind == 0) {
            for (int k = 0; k < gp.dim; ++k) {
                Vec r(gp.dim, Rational(0));
                r[k] = 1;
                out.cones[u].push_back(r);
            }
        } else if (kind == 1) {
            for (int k = 0; k < gp.dim; ++k) {
                Vec r(gp.dim, Rational(0));
                r[k] = -1;
                out.cones[u].push_back(r);
            }
        } else {
            Vec r(gp.dim, Rational(0));
            bool nonzero = false;
            for (int k = 0; k < gp.dim; ++k) {
                r[k] = draw(-2, 2);
                if (r[k] != 0) nonzero = true;
            }
            if (!nonzero) r[0] = 1;
            out.cones[u].push_back(r);
        }
    }
    return out;
}

void write_reports(const std::string& base, const std::string& human_text,
                   const std::vector<ReportRow>& rows) {
    std::ofstream txt(base + ".report.txt");
    if (!txt) throw ParseError("cannot write " + base + ".report.txt");
    txt << human_text;
    std::ofstream tsv(base + ".report.tsv");
    if (!tsv) throw ParseError("cannot write " + base + ".report.tsv");
    tsv << "name\tseed\tpass\tworst-slack\n";
    for (const ReportRow& r : rows)
        tsv << r.name << "\t" << r.seed << "\t" << (r.pass ? "1" : "0") << "\t" << rat_str(r.worst_slack)
            << "\n";
}

}  // namespace ftaplab
