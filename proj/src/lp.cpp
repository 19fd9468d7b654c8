#include "ftaplab/lp.hpp"

#include <algorithm>

namespace ftaplab::lp {

namespace {

// Dictionary simplex over exact rationals. Variables 0..n-1 are the problem
// variables, n..n+m-1 the row slacks, n+m the phase-1 auxiliary.
class Simplex {
public:
    explicit Simplex(const Problem& p) : prob_(p), m_(int(p.A.size())), morig_(m_), n_(int(p.c.size())) {
        for (const auto& row : p.A)
            if (int(row.size()) != n_) throw LpError("ragged constraint matrix");
        if (int(p.b.size()) != m_) throw LpError("rhs size mismatch");
    }

    Solution run() {
        init_dictionary();
        if (needs_phase1()) {
            Solution infeas;
            if (!phase1(infeas)) return infeas;
        }
        install_objective(prob_.c);
        return phase2();
    }

private:
    const Problem& prob_;
    int m_, morig_, n_;
    std::vector<int> basic_;     // variable per row
    std::vector<int> nonbasic_;  // variable per column
    Mat a_;                      // x_basic[i] = b_[i] - sum_j a_[i][j] x_nonbasic[j]
    Vec b_;
    Vec cbar_;  // z = v_ + sum_j cbar_[j] x_nonbasic[j]
    Rational v_ = 0;

    void init_dictionary() {
        basic_.resize(m_);
        nonbasic_.resize(n_);
        for (int i = 0; i < m_; ++i) basic_[i] = n_ + i;
        for (int j = 0; j < n_; ++j) nonbasic_[j] = j;
        a_ = prob_.A;
        b_ = prob_.b;
        cbar_.assign(n_, Rational(0));
        v_ = 0;
    }

    bool needs_phase1() const {
        return std::any_of(b_.begin(), b_.end(), [](const Rational& x) { return x < 0; });
    }

    void pivot(int l, int e) {
        Rational piv = a_[l][e];
        int enter_var = nonbasic_[e], leave_var = basic_[l];
        // leaving row
        b_[l] /= piv;
        for (int j = 0; j < int(a_[l].size()); ++j) a_[l][j] /= piv;
        a_[l][e] = Rational(1) / piv;
        // other rows
        for (int i = 0; i < m_; ++i) {
            if (i == l) continue;
            Rational f = a_[i][e];
            if (f == 0) continue;
            b_[i] -= f * b_[l];
            for (int j = 0; j < int(a_[i].size()); ++j) a_[i][j] -= f * a_[l][j];
            a_[i][e] = -f / piv;
        }
        Rational cf = cbar_[e];
        if (cf != 0) {
            v_ += cf * b_[l];
            for (int j = 0; j < int(cbar_.size()); ++j) cbar_[j] -= cf * a_[l][j];
            cbar_[e] = -cf / piv;
        }
        basic_[l] = enter_var;
        nonbasic_[e] = leave_var;
    }

    // Bland: entering column with positive reduced cost and smallest variable
    // index; leaving row by min ratio, ties on smallest basic variable index.
    int entering() const {
        int best = -1;
        for (int j = 0; j < int(cbar_.size()); ++j)
            if (cbar_[j] > 0 && (best < 0 || nonbasic_[j] < nonbasic_[best])) best = j;
        return best;
    }

    int leaving(int e) const {
        int best = -1;
        Rational best_ratio = 0;
        for (int i = 0; i < m_; ++i) {
            if (a_[i][e] <= 0) continue;
            Rational ratio = b_[i] / a_[i][e];
            if (best < 0 || ratio < best_ratio || (ratio == best_ratio && basic_[i] < basic_[best])) {
                best = i;
                best_ratio = ratio;
            }
        }
        return best;
    }

    // Returns false (filling `out`) when the program is infeasible.
    bool phase1(Solution& out) {
        int aux = n_ + m_;
        for (int i = 0; i < m_; ++i) a_[i].push_back(Rational(-1));
        nonbasic_.push_back(aux);
        cbar_.assign(nonbasic_.size(), Rational(0));
        cbar_.back() = -1;  // maximize -x0
        v_ = 0;
        // make feasible: pivot aux against the most violated row
        int l = 0;
        for (int i = 1; i < m_; ++i)
            if (b_[i] < b_[l]) l = i;
        pivot(l, int(nonbasic_.size()) - 1);
        optimize();
        if (v_ < 0) {
            out.status = Status::Infeasible;
            out.dual = extract_dual();
            verify_farkas(out.dual);
            return false;
        }
        // drive the auxiliary out of the basis if needed (it sits at zero)
        for (int i = 0; i < m_; ++i) {
            if (basic_[i] != aux) continue;
            int col = -1;
            for (int j = 0; j < int(nonbasic_.size()); ++j)
                if (nonbasic_[j] < aux && a_[i][j] != 0) {
                    col = j;
                    break;
                }
            if (col >= 0) {
                pivot(i, col);
            } else {
                // the row reads x0 = 0 with no other variables: drop it
                a_.erase(a_.begin() + i);
                b_.erase(b_.begin() + i);
                basic_.erase(basic_.begin() + i);
                m_ -= 1;
            }
            break;
        }
        // remove the auxiliary column
        int col = -1;
        for (int j = 0; j < int(nonbasic_.size()); ++j)
            if (nonbasic_[j] == aux) col = j;
        if (col < 0) throw LpError("auxiliary variable lost");
        nonbasic_.erase(nonbasic_.begin() + col);
        cbar_.erase(cbar_.begin() + col);
        for (int i = 0; i < m_; ++i) a_[i].erase(a_[i].begin() + col);
        return true;
    }

    void install_objective(const Vec& c) {
        cbar_.assign(nonbasic_.size(), Rational(0));
        v_ = 0;
        for (int var = 0; var < n_; ++var) {
            if (c[var] == 0) continue;
            bool placed = false;
            for (int j = 0; j < int(nonbasic_.size()); ++j)
                if (nonbasic_[j] == var) {
                    cbar_[j] += c[var];
                    placed = true;
                    break;
                }
            if (placed) continue;
            for (int i = 0; i < m_; ++i)
                if (basic_[i] == var) {
                    v_ += c[var] * b_[i];
                    for (int j = 0; j < int(nonbasic_.size()); ++j) cbar_[j] -= c[var] * a_[i][j];
                    break;
                }
        }
    }

    // Runs pivots to optimality; returns the unbounded entering column or -1.
    int optimize() {
        for (;;) {
            int e = entering();
            if (e < 0) return -1;
            int l = leaving(e);
            if (l < 0) return e;
            pivot(l, e);
        }
    }

    Vec current_x() const {
        Vec x(n_, Rational(0));
        for (int i = 0; i < m_; ++i)
            if (basic_[i] < n_) x[basic_[i]] = b_[i];
        return x;
    }

    Vec extract_dual() const {
        // y_i = -(reduced cost of slack i); basic slacks contribute zero
        Vec y(morig_, Rational(0));
        for (int j = 0; j < int(nonbasic_.size()); ++j) {
            int var = nonbasic_[j];
            if (var >= n_ && var < n_ + morig_) y[var - n_] = -cbar_[j];
        }
        return y;
    }

    Solution phase2() {
        Solution out;
        int unb = optimize();
        if (unb >= 0) {
            out.status = Status::Unbounded;
            out.x = current_x();
            out.ray.assign(n_, Rational(0));
            if (nonbasic_[unb] < n_) out.ray[nonbasic_[unb]] = 1;
            for (int i = 0; i < m_; ++i)
                if (basic_[i] < n_) out.ray[basic_[i]] = -a_[i][unb];
            verify_ray(out.x, out.ray);
            return out;
        }
        out.status = Status::Optimal;
        out.objective = v_;
        out.x = current_x();
        out.dual = extract_dual();
        verify_optimal(out);
        return out;
    }

    void verify_feasible(const Vec& x) const {
        for (const Rational& xi : x)
            if (xi < 0) throw LpError("solver bug: negative coordinate");
        for (int i = 0; i < morig_; ++i) {
            Rational lhs = 0;
            for (int j = 0; j < n_; ++j) lhs += prob_.A[i][j] * x[j];
            if (lhs > prob_.b[i]) throw LpError("solver bug: primal infeasible output");
        }
    }

    void verify_optimal(const Solution& s) const {
        verify_feasible(s.x);
        Rational cx = 0;
        for (int j = 0; j < n_; ++j) cx += prob_.c[j] * s.x[j];
        if (cx != s.objective) throw LpError("solver bug: objective mismatch");
        Rational yb = 0;
        for (int i = 0; i < morig_; ++i) {
            if (s.dual[i] < 0) throw LpError("solver bug: negative dual");
            yb += s.dual[i] * prob_.b[i];
        }
        if (yb != s.objective) throw LpError("solver bug: duality gap");
        for (int j = 0; j < n_; ++j) {
            Rational ya = 0;
            for (int i = 0; i < morig_; ++i) ya += s.dual[i] * prob_.A[i][j];
            if (ya < prob_.c[j]) throw LpError("solver bug: dual infeasible");
        }
    }

    void verify_ray(const Vec& x, const Vec& d) const {
        verify_feasible(x);
        Rational cd = 0;
        for (int j = 0; j < n_; ++j) {
            if (d[j] < 0) throw LpError("solver bug: ray negative");
            cd += prob_.c[j] * d[j];
        }
        if (cd <= 0) throw LpError("solver bug: ray does not improve");
        for (int i = 0; i < morig_; ++i) {
            Rational ad = 0;
            for (int j = 0; j < n_; ++j) ad += prob_.A[i][j] * d[j];
            if (ad > 0) throw LpError("solver bug: ray leaves feasible set");
        }
    }

    void verify_farkas(const Vec& y) const {
        Rational yb = 0;
        for (int i = 0; i < morig_; ++i) {
            if (y[i] < 0) throw LpError("solver bug: negative Farkas multiplier");
            yb += y[i] * prob_.b[i];
        }
        if (yb >= 0) throw LpError("solver bug: Farkas certificate fails on rhs");
        for (int j = 0; j < n_; ++j) {
            Rational ya = 0;
            for (int i = 0; i < morig_; ++i) ya += y[i] * prob_.A[i][j];
            if (ya < 0) throw LpError("solver bug: Farkas certificate fails on column");
        }
    }
};

}  // namespace

Solution solve(const Problem& p) { return Simplex(p).run(); }

int Builder::add_var(bool nonneg) {
    nonneg_.push_back(nonneg);
    return int(nonneg_.size()) - 1;
}

void Builder::add_le(const std::map<int, Rational>& coef, const Rational& rhs) {
    rows_.push_back(Row{coef, rhs, -1});
}

void Builder::add_ge(const std::map<int, Rational>& coef, const Rational& rhs) {
    rows_.push_back(Row{coef, rhs, +1});
}

void Builder::add_eq(const std::map<int, Rational>& coef, const Rational& rhs) {
    rows_.push_back(Row{coef, rhs, 0});
}

void Builder::set_objective(const std::map<int, Rational>& coef) { objective_ = coef; }

Solution Builder::solve() const {
    // map to canonical columns: nonneg var -> one column, free var -> pair
    int nv = int(nonneg_.size());
    std::vector<int> col_pos(nv), col_neg(nv, -1);
    int ncols = 0;
    for (int i = 0; i < nv; ++i) {
        col_pos[i] = ncols++;
        if (!nonneg_[i]) col_neg[i] = ncols++;
    }
    Problem p;
    p.c.assign(ncols, Rational(0));
    for (const auto& [var, c] : objective_) {
        p.c[col_pos[var]] += c;
        if (col_neg[var] >= 0) p.c[col_neg[var]] -= c;
    }
    auto emit_le = [&](const std::map<int, Rational>& coef, const Rational& rhs, int sign) {
        Vec row(ncols, Rational(0));
        for (const auto& [var, c] : coef) {
            row[col_pos[var]] += sign * c;
            if (col_neg[var] >= 0) row[col_neg[var]] -= sign * c;
        }
        p.A.push_back(std::move(row));
        p.b.push_back(sign * rhs);
    };
    for (const auto& r : rows_) {
        if (r.sense <= 0) emit_le(r.coef, r.rhs, +1);
        if (r.sense >= 0) emit_le(r.coef, r.rhs, -1);
    }
    Solution s = lp::solve(p);
    auto back = [&](const Vec& x) {
        Vec out(nv, Rational(0));
        if (x.empty()) return out;
        for (int i = 0; i < nv; ++i) {
            out[i] = x[col_pos[i]];
            if (col_neg[i] >= 0) out[i] -= x[col_neg[i]];
        }
        return out;
    };
    s.x = back(s.x);
    s.ray = back(s.ray);
    return s;
}

}  // namespace ftaplab::lp
