// ftap: command-line front end for the ftaplab library.
//
// Exit codes: 0 = property holds / pass, 2 = property fails / arbitrage
// found, 1 = usage or parse error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ftaplab/calculus.hpp"
#include "ftaplab/duality.hpp"
#include "ftaplab/harness.hpp"
#include "ftaplab/io.hpp"
#include "ftaplab/market.hpp"
#include "ftaplab/metrics.hpp"

using namespace ftaplab;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 2;
constexpr int kUsage = 1;

TreeFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_tree_file(ss.str());
}

const AdaptedProcess& first_comp(const TreeFile& f, const std::string& name) {
    const TreeFile::Proc* p = f.find(name);
    if (!p) throw ParseError("no process named " + name);
    return p->comps[0];
}

std::string vec_str(const Vec& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += rat_str(v[i]);
    }
    return out;
}

int cmd_analyze(const std::string& path) {
    TreeFile f = load(path);
    MarketModel m = to_market(f);
    ArbitrageCheck na = check_NA(m), nupbr = check_NUPBR(m), nflvr = check_NFLVR(m);
    std::cout << "NA " << (na.holds ? "holds" : "fails") << "\n";
    std::cout << "NUPBR " << (nupbr.holds ? "holds" : "fails") << "\n";
    std::cout << "NFLVR " << (nflvr.holds ? "holds" : "fails") << "\n";
    for (const ArbitrageCheck* c : {&na, &nupbr}) {
        if (c->holds) continue;
        const ArbitrageCertificate& cert = c->certificate;
        std::cout << (cert.kind == CertificateKind::NAViolation ? "NA" : "NUPBR")
                  << "-certificate phi(root) =";
        for (const PredictableControl& s : cert.strategy) std::cout << " " << rat_str(s.v[0]);
        std::cout << "\n  terminal " << vec_str(cert.terminal.v) << "\n";
    }
    EsmResult esm = esm_exists(m);
    if (esm.exists)
        std::cout << "ESM exists, q = " << vec_str(esm.measure.q_probs) << "\n";
    else
        std::cout << "ESM does not exist\n";
    KrepsYanResult ky = kreps_yan_construct(m);
    if (ky.success)
        std::cout << "Kreps-Yan Z = " << vec_str(ky.measure.density.v) << "\n";
    else
        std::cout << "Kreps-Yan fails at atom " << ky.failed_atom << "\n";
    return nflvr.holds ? kPass : kFail;
}

int cmd_decompose(const std::string& path, const std::string& proc, const std::string& thresh) {
    TreeFile f = load(path);
    const AdaptedProcess& x = first_comp(f, proc);
    Rational c;
    if (thresh.empty()) {
        c = jump_threshold(x);
        std::cout << "threshold " << rat_str(c) << " (auto)\n";
    } else {
        auto r = rat_parse(thresh);
        if (!r || *r <= 0) throw ParseError("bad threshold " + thresh);
        c = *r;
        std::cout << "threshold " << rat_str(c) << "\n";
    }
    Decomposition d = big_jump_split(x, c);
    std::cout << "B " << vec_str(d.B.v) << "\n";
    std::cout << "M " << vec_str(d.M.v) << "\n";
    std::cout << "Xcheck " << vec_str(d.Xcheck.v) << "\n";
    return kPass;
}

int cmd_distance(const std::string& path, const std::string& p1, const std::string& p2,
                 bool emery, const std::string& eps_s) {
    TreeFile f = load(path);
    const AdaptedProcess& x = first_comp(f, p1);
    const AdaptedProcess& y = first_comp(f, p2);
    if (!emery) {
        std::cout << "ucp " << rat_str(ucp_distance(x, y)) << "\n";
        return kPass;
    }
    Rational eps = rat(1, 100);
    if (!eps_s.empty()) {
        auto r = rat_parse(eps_s);
        if (!r || *r <= 0) throw ParseError("bad eps " + eps_s);
        eps = *r;
    }
    DistanceResult d = emery_distance(x, y, eps);
    std::cout << "emery lower " << rat_str(d.value) << " upper " << rat_str(d.upper()) << "\n";
    return kPass;
}

int cmd_put_profile(const std::string& path, const std::vector<std::string>& names,
                    const std::vector<std::string>& grid_s) {
    TreeFile f = load(path);
    std::vector<const AdaptedProcess*> fam;
    for (const std::string& n : names) fam.push_back(&first_comp(f, n));
    Vec grid;
    for (const std::string& g : grid_s) {
        auto r = rat_parse(g);
        if (!r) throw ParseError("bad grid value " + g);
        grid.push_back(*r);
    }
    PUTProfile p = put_profile_sup(fam, grid);
    for (size_t i = 0; i < grid.size(); ++i)
        std::cout << "a " << rat_str(grid[i]) << " profile " << rat_str(p.values[i])
                  << (p.lower_bound_only ? " (lower bound)" : "") << "\n";
    return kPass;
}

int cmd_certify(const std::string& path, bool esm, bool ky, bool defl) {
    TreeFile f = load(path);
    MarketModel m = to_market(f);
    if (esm) {
        EsmResult r = esm_exists(m);
        if (!r.exists) {
            std::cout << "no separating measure\n";
            return kFail;
        }
        verify_separating_measure(m, r.measure);
        std::cout << "q = " << vec_str(r.measure.q_probs) << "\n";
        std::cout << "Z = " << vec_str(r.measure.density.v) << "\n";
        return kPass;
    }
    if (ky) {
        KrepsYanResult r = kreps_yan_construct(m);
        if (!r.success) {
            std::cout << "construction fails at atom " << r.failed_atom << "\n";
            return kFail;
        }
        verify_separating_measure(m, r.measure);
        std::cout << "Z = " << vec_str(r.measure.density.v) << "\n";
        std::cout << "atom optima " << vec_str(r.atom_optima) << "\n";
        return kPass;
    }
    if (defl) {
        if (!check_NUPBR(m).holds) {
            std::cout << "NUPBR fails, no deflator\n";
            return kFail;
        }
        Deflator d = numeraire_deflator(m);
        DeflatorReport rep = verify_deflator(m, d);
        std::cout << "D = " << vec_str(d.D.v) << "\n";
        std::cout << "strategy " << (d.strategy_certified ? "certified" : "uncertified") << "\n";
        return rep.ok ? kPass : kFail;
    }
    throw CLI::ValidationError("certify", "pick one of --esm, --kreps-yan, --deflator");
}

// --- harness suites over seeded random models ------------------------------

GenParams sweep_params(std::uint64_t seed, bool emm_first) {
    GenParams p;
    p.seed = seed;
    p.depth = 2 + int(seed % 2);
    p.branching = 2 + int(seed / 2 % 2);
    p.dim = 1 + int(seed / 4 % 2);
    p.constraint_density = int(seed % 3) * 25;
    p.emm_first = emm_first;
    return p;
}

ExperimentReport run_suite(const std::string& suite, std::uint64_t seed) {
    ExperimentReport r;
    r.name = suite;
    if (suite == "ftap") {
        MarketModel m = to_market(generate_random_model(sweep_params(seed, seed % 2 == 0)));
        bool nflvr = check_NFLVR(m).holds;
        bool esm = esm_exists(m).exists;
        bool ky = kreps_yan_construct(m).success;
        r.instances = 1;
        if (nflvr != esm) r.violation(seed, "NFLVR vs ESM disagree", rat(-1));
        if (esm != ky) r.violation(seed, "ESM vs Kreps-Yan disagree", rat(-1));
        return r;
    }
    if (suite == "burkholder" || suite == "doob-meyer") {
        ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
        AdaptedProcess s(t);
        std::uint64_t state = seed * 2654435761u + 1;
        auto draw = [&] {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            return long((state >> 33) % 9);
        };
        // downward-rounded random nonnegative supermartingale on {0..8}/2
        s.v[0] = rat(draw(), 2);
        for (int u = 0; u < t.size(); ++u) {
            if (t.is_leaf(u)) continue;
            for (int c : t.children(u)) s.v[c] = rat(draw(), 2);
            Rational mean = 0;
            for (int c : t.children(u)) mean += t.node(c).cond_prob * s.v[c];
            if (mean > s.v[u])
                for (int c : t.children(u)) s.v[c] = s.v[c] * s.v[u] / mean;
        }
        if (suite == "doob-meyer") return check_doob_meyer_bound(s, rat(4));
        std::vector<PredictableControl> hs;
        for (int mask = 0; mask < 8; ++mask) {
            PredictableControl h(t);
            int k = 0;
            for (int u = 0; u < t.size(); ++u)
                if (!t.is_leaf(u)) h.v[u] = (mask >> k++ & 1) ? rat(1) : rat(-1);
            hs.push_back(h);
        }
        return check_burkholder_supermartingale(s, hs, Vec{rat(1, 2), rat(1), rat(2), rat(4)});
    }
    if (suite == "nupbr-put") {
        GenParams p = sweep_params(seed, true);
        MarketModel m = to_market(generate_random_model(p));
        std::vector<WealthProcess> xs;
        for (int n = 1; n <= 10; ++n) {
            std::vector<PredictableControl> h;
            for (int j = 0; j < m.dim(); ++j)
                h.emplace_back(*m.tree, j == 0 ? rat(1, 4 * n) : rat(0));
            xs.push_back(wealth(m, h));
        }
        return experiment_nupbr_put(m, xs, Vec{rat(1), rat(2), rat(4), rat(8)});
    }
    if (suite == "slicing") {
        ScenarioTree t = ScenarioTree::binary(6, rat(1, 2));
        AdaptedProcess n(t);
        Rational eps = rat(1, 2 + long(seed % 3));
        for (int i = 1; i < t.size(); ++i) {
            bool up = t.children(t.parent(i))[0] == i;
            n.v[i] = n.v[t.parent(i)] + (up ? eps : -eps);
        }
        return check_slicing_lemma(n, eps, rat(1, 24));
    }
    throw CLI::ValidationError("harness", "unknown suite " + suite);
}

int cmd_harness(const std::string& suite, const std::string& seeds, const std::string& out) {
    auto dots = seeds.find("..");
    if (dots == std::string::npos) throw ParseError("seeds must be a..b");
    std::uint64_t a = std::stoull(seeds.substr(0, dots));
    std::uint64_t b = std::stoull(seeds.substr(dots + 2));
    if (b < a) throw ParseError("empty seed range");
    std::string text;
    std::vector<ReportRow> rows;
    bool ok = true;
    for (std::uint64_t s = a; s <= b; ++s) {
        ExperimentReport r = run_suite(suite, s);
        text += format_report(r);
        rows.push_back({r.name, s, r.pass() || r.skipped, r.worst});
        if (!r.pass() && !r.skipped) ok = false;
    }
    std::cout << text;
    if (!out.empty()) write_reports(out, text, rows);
    return ok ? kPass : kFail;
}

int cmd_gen(std::uint64_t seed, int depth, int branch, int dim, int density, bool emm_first) {
    GenParams p;
    p.seed = seed;
    p.depth = depth;
    p.branching = branch;
    p.dim = dim;
    p.constraint_density = density;
    p.emm_first = emm_first;
    std::cout << render_tree_file(generate_random_model(p));
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact arbitrage theory on finite scenario trees"};
    app.require_subcommand(1);

    std::string file, proc, proc2, thresh, eps, seeds = "0..0", out, suite;
    std::vector<std::string> procs, grid;
    bool emery = false, ucp = false, esm = false, ky = false, defl = false, emm = false;
    std::uint64_t seed = 0;
    int depth = 2, branch = 2, dim = 1, density = 0;

    CLI::App* analyze = app.add_subcommand("analyze", "arbitrage verdicts and certificates");
    analyze->add_option("file", file)->required();

    CLI::App* decompose = app.add_subcommand("decompose", "big-jump split B + M + Xcheck");
    decompose->add_option("file", file)->required();
    decompose->add_option("--proc", proc)->required();
    decompose->add_option("--threshold", thresh);

    CLI::App* distance = app.add_subcommand("distance", "ucp or Emery distance");
    distance->add_option("file", file)->required();
    distance->add_option("--proc", proc)->required();
    distance->add_option("--proc2", proc2)->required();
    distance->add_flag("--emery", emery);
    distance->add_flag("--ucp", ucp);
    distance->add_option("--eps", eps);

    CLI::App* putp = app.add_subcommand("put-profile", "uniform tightness profile");
    putp->add_option("file", file)->required();
    putp->add_option("--procs", procs)->required();
    putp->add_option("--grid", grid)->required();

    CLI::App* certify = app.add_subcommand("certify", "separating measures and deflators");
    certify->add_option("file", file)->required();
    certify->add_flag("--esm", esm);
    certify->add_flag("--kreps-yan", ky);
    certify->add_flag("--deflator", defl);

    CLI::App* harness = app.add_subcommand("harness", "property suites over seeded models");
    harness->add_option("--suite", suite)->required();
    harness->add_option("--seeds", seeds);
    harness->add_option("--out", out);

    CLI::App* gen = app.add_subcommand("gen", "print a seeded random model");
    gen->add_option("--seed", seed)->required();
    gen->add_option("--depth", depth);
    gen->add_option("--branch", branch);
    gen->add_option("--dim", dim);
    gen->add_option("--density", density);
    gen->add_flag("--emm-first", emm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(file);
        if (*decompose) return cmd_decompose(file, proc, thresh);
        if (*distance) {
            if (emery == ucp) throw ParseError("pick exactly one of --emery, --ucp");
            return cmd_distance(file, proc, proc2, emery, eps);
        }
        if (*putp) return cmd_put_profile(file, procs, grid);
        if (*certify) return cmd_certify(file, esm, ky, defl);
        if (*harness) return cmd_harness(suite, seeds, out);
        if (*gen) return cmd_gen(seed, depth, branch, dim, density, emm);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
