#include "simlik/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simlik/errors.hpp"

namespace simlik {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // 1/golden ratio

double checked_eval(const Objective& f, const Vec& x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw NonFiniteObjective("objective returned a non-finite value");
    return v;
}

struct Candidate {
    Vec x;
    double value = -std::numeric_limits<double>::infinity();
};

// Exact-tie break: smallest argmax lexicographically.
bool better(const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    for (int j = 0; j < a.x.size(); ++j)
        if (a.x[j] != b.x[j]) return a.x[j] < b.x[j];
    return false;
}

Candidate golden_section(const Objective& f, double lo, double hi, const OptimizerConfig& cfg,
                         std::vector<IterationRecord>& trace, int& iter) {
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    Vec xc(1), xd(1);
    xc[0] = c;
    xd[0] = d;
    double fc = checked_eval(f, xc), fd = checked_eval(f, xd);
    Candidate best = fc >= fd ? Candidate{xc, fc} : Candidate{xd, fd};
    while (b - a > 0.5 * cfg.x_tol) {  // probes stay within x_tol of the maximizer
        if (++iter > cfg.max_iter)
            throw BudgetExceeded("golden section: max_iter reached before x_tol");
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            xd[0] = d;
            c = b - kInvPhi * (b - a);
            xc[0] = c;
            fc = checked_eval(f, xc);
        } else {
            a = c;
            c = d;
            fc = fd;
            xc[0] = c;
            d = a + kInvPhi * (b - a);
            xd[0] = d;
            fd = checked_eval(f, xd);
        }
        const Candidate cur = fc >= fd ? Candidate{xc, fc} : Candidate{xd, fd};
        if (better(cur, best)) best = cur;
        trace.push_back({iter, best.value});
    }
    Vec xm(1);
    xm[0] = 0.5 * (a + b);
    const double fm = checked_eval(f, xm);
    if (better({xm, fm}, best)) best = {xm, fm};

    // Near the maximum the objective is flat to rounding over a plateau much
    // wider than x_tol, so bracketing alone can stall ~1e-6 off on smooth
    // objectives. One parabolic fit through well-separated points fixes that;
    // the result is kept only when it does not lose objective value.
    const double step = 1e-4 * (1.0 + std::abs(best.x[0]));
    if (best.x[0] - step >= lo && best.x[0] + step <= hi) {
        Vec xl = best.x, xr = best.x;
        xl[0] -= step;
        xr[0] += step;
        const double fl = checked_eval(f, xl), fr = checked_eval(f, xr);
        const double denom = fl - 2.0 * best.value + fr;
        if (denom < 0.0) {
            Vec xv = best.x;
            xv[0] += 0.5 * step * (fl - fr) / denom;
            xv[0] = std::min(hi, std::max(lo, xv[0]));
            const double fv = checked_eval(f, xv);
            if (fv >= best.value) best = {xv, fv};
        }
    }
    return best;
}

Candidate nelder_mead(const Objective& f, const Box& box, const Vec& start,
                      const OptimizerConfig& cfg, std::vector<IterationRecord>& trace,
                      int& iter) {
    const int d = box.dim();
    const int m = d + 1;
    std::vector<Candidate> simplex(m);
    simplex[0] = {box.clamp(start), 0.0};
    simplex[0].value = checked_eval(f, simplex[0].x);
    for (int j = 1; j < m; ++j) {
        Vec x = simplex[0].x;
        const double span = box.hi[j - 1] - box.lo[j - 1];
        x[j - 1] += (x[j - 1] + 0.1 * span <= box.hi[j - 1]) ? 0.1 * span : -0.1 * span;
        simplex[j] = {box.clamp(x), 0.0};
        simplex[j].value = checked_eval(f, simplex[j].x);
    }

    auto order = [&] {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Candidate& a, const Candidate& b) { return better(a, b); });
    };
    order();
    Candidate best = simplex.front();

    while (true) {
        if (++iter > cfg.max_iter)
            throw BudgetExceeded("nelder-mead: max_iter reached before f_tol");
        if (std::abs(simplex.front().value - simplex.back().value) <= cfg.f_tol) break;

        Vec centroid = Vec::Zero(d);
        for (int j = 0; j < m - 1; ++j) centroid += simplex[j].x;
        centroid /= static_cast<double>(m - 1);
        const Vec& worst = simplex.back().x;

        auto eval_at = [&](double coef) {
            Candidate c;
            c.x = box.clamp(centroid + coef * (centroid - worst));
            c.value = checked_eval(f, c.x);
            return c;
        };

        const Candidate refl = eval_at(1.0);
        if (better(refl, simplex.front())) {
            const Candidate exp_ = eval_at(2.0);
            simplex.back() = better(exp_, refl) ? exp_ : refl;
        } else if (better(refl, simplex[m - 2])) {
            simplex.back() = refl;
        } else {
            const Candidate contr =
                better(refl, simplex.back()) ? eval_at(0.5) : eval_at(-0.5);
            if (better(contr, simplex.back())) {
                simplex.back() = contr;
            } else {
                for (int j = 1; j < m; ++j) {  // shrink toward the best vertex
                    simplex[j].x = simplex[0].x + 0.5 * (simplex[j].x - simplex[0].x);
                    simplex[j].value = checked_eval(f, simplex[j].x);
                }
            }
        }
        order();
        if (better(simplex.front(), best)) best = simplex.front();
        trace.push_back({iter, best.value});
    }
    return best;
}

// Kronecker low-discrepancy points in the unit cube.
Vec unit_point(int index, int dim) {
    static const double alpha[8] = {0.6180339887498949, 0.7548776662466927,
                                    0.8191725133961645, 0.8566748838545029,
                                    0.8812714616335696, 0.8986537126286992,
                                    0.9115923534820549, 0.9215993196339830};
    Vec u(dim);
    for (int j = 0; j < dim; ++j) {
        const double a = alpha[j % 8];
        u[j] = std::fmod(0.5 + (index + 1) * a * (1.0 + j / 8), 1.0);
    }
    return u;
}

}  // namespace

MaximizeResult maximize(const Objective& objective, const Box& box, const OptimizerConfig& cfg) {
    if (!cfg.valid()) throw std::invalid_argument("invalid optimizer config");
    if (box.dim() < 1) throw std::invalid_argument("maximize: empty box");
    if ((box.hi.array() < box.lo.array()).any())
        throw std::invalid_argument("maximize: box with hi < lo");

    MaximizeResult out;
    int iter = 0;
    Candidate best;

    if (cfg.method == OptimizerConfig::Method::golden_section) {
        if (box.dim() != 1)
            throw std::invalid_argument("golden_section requires a 1-D box");
        // Multistarts = bracket subdivision, robust to mild multimodality.
        const int s = cfg.multistart_count;
        for (int j = 0; j < s; ++j) {
            const double lo = box.lo[0] + (box.hi[0] - box.lo[0]) * j / s;
            const double hi = box.lo[0] + (box.hi[0] - box.lo[0]) * (j + 1) / s;
            const Candidate c = golden_section(objective, lo, hi, cfg, out.trace, iter);
            if (better(c, best)) best = c;
        }
    } else {
        for (int j = 0; j < cfg.multistart_count; ++j) {
            const Vec u = unit_point(j, box.dim());
            const Vec start = box.lo + u.cwiseProduct(box.hi - box.lo);
            const Candidate c = nelder_mead(objective, box, start, cfg, out.trace, iter);
            if (better(c, best)) best = c;
        }
    }

    // The trace logs best-so-far across all starts.
    double running = -std::numeric_limits<double>::infinity();
    for (auto& rec : out.trace) {
        running = std::max(running, rec.best_value);
        rec.best_value = running;
    }

    out.argmax = best.x;
    out.value = best.value;
    return out;
}

}  // namespace simlik
