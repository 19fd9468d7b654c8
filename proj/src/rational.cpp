#include "ftaplab/rational.hpp"

#include <cctype>
#include <cmath>

namespace ftaplab {

std::optional<Rational> rat_parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= s.size()) return std::nullopt;
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    auto digits = [](const std::string& t, bool sign_ok) {
        size_t i = 0;
        if (sign_ok && (t[0] == '-' || t[0] == '+')) i = 1;
        if (i >= t.size()) return false;
        for (; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };
    if (!digits(num, true) || !digits(den, false)) return std::nullopt;
    if (num[0] == '+') return std::nullopt;  // canonical form has no plus sign
    if (num.size() > 1 && (num[0] == '0' || (num[0] == '-' && num[1] == '0'))) return std::nullopt;
    if (den.size() > 1 && den[0] == '0') return std::nullopt;
    Integer n(num), d(den);
    if (d == 0) return std::nullopt;
    if (boost::multiprecision::gcd(boost::multiprecision::abs(n), d) != 1) return std::nullopt;
    Rational r(n, d);
    return r;
}

Rational rat_approx(double x, long max_den) {
    if (!std::isfinite(x)) return Rational(0);
    bool neg = x < 0;
    double v = neg ? -x : x;
    // Stern-Brocot / mediant search for the best approximation with
    // denominator bounded by max_den.
    long pl = 0, ql = 1, ph = 1, qh = 0;
    double best_err = v;
    long bp = 0, bq = 1;
    for (int iter = 0; iter < 2048; ++iter) {
        long pm = pl + ph, qm = ql + qh;
        if (qm > max_den) break;
        double m = double(pm) / double(qm);
        double err = std::fabs(v - m);
        if (err < best_err) {
            best_err = err;
            bp = pm;
            bq = qm;
        }
        if (m < v)
            pl = pm, ql = qm;
        else if (m > v)
            ph = pm, qh = qm;
        else
            break;
    }
    Rational r(bp, bq);
    return neg ? Rational(-r) : r;
}

}  // namespace ftaplab
