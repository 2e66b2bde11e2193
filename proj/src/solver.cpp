#include <ixt/solver.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <thread>

namespace ixt {

namespace {

constexpr const char *kOrigin = "solver";
constexpr double kInf = std::numeric_limits<double>::infinity();

double tolerance_for(double value)
{
    return 1e-9 * std::max(1.0, std::abs(value));
}

using Clock = std::chrono::steady_clock;

/*======================================================================================================================
 * Flattened problem
 *====================================================================================================================*/

struct Option
{
    std::int32_t cand;      ///< -1 for NO_INDEX
    std::int32_t rel;       ///< flat position in Model::rel, -1 for NO_INDEX
    double gamma;
};

struct Slot
{
    std::uint32_t begin, end;
};

struct Tmpl
{
    double beta;
    std::uint32_t slot_begin, slot_end;
};

struct Block
{
    std::uint32_t rel_begin, rel_end;
    std::uint32_t tmpl_begin, tmpl_end;
    double scale;
    std::vector<std::pair<std::uint32_t, double>> ucost;
};

/// A z-only row in `Σ w z <= rhs` form.
struct ZRow
{
    std::vector<std::pair<std::uint32_t, double>> terms;
    double rhs;
    std::string name;
    std::string group;
    bool cover = false;     ///< added by a warm re-solve, not part of the problem
};

/// raw cost(block) + Σ ucost z <= rhs
struct CostRow
{
    std::uint32_t block;
    double rhs;
    std::string name;
    std::string group;
};

struct Model
{
    const BipProblem *bip = nullptr;
    std::size_t n = 0;
    std::vector<Block> blocks;
    std::vector<std::int32_t> rel;
    std::vector<std::uint32_t> rel_block;
    std::vector<Tmpl> tmpls;
    std::vector<Slot> slots;
    std::vector<Option> opts;
    std::vector<std::vector<std::uint32_t>> cand_blocks;
    std::vector<std::vector<std::uint32_t>> cand_rels;
    std::vector<double> zc;
    std::vector<double> size;
    double constant = 0;

    std::vector<ZRow> zrows;
    int knapsack = -1;
    std::vector<CostRow> crows;
    std::vector<std::vector<std::uint32_t>> block_crows;
    std::vector<std::string> infeasible_groups;

    std::size_t dual_count() const { return zrows.size() + crows.size(); }
};

Model build_model(const BipProblem &bip)
{
    Model m;
    m.bip = &bip;
    m.n = bip.candidates().size();
    m.cand_blocks.resize(m.n);
    m.cand_rels.resize(m.n);
    for (std::size_t a = 0; a != m.n; ++a) {
        m.zc.push_back(bip.z_coefficient(a));
        m.size.push_back(bip.candidates()[a].size_bytes);
    }
    m.constant = bip.objective_constant();

    for (std::size_t b = 0; b != bip.blocks().size(); ++b) {
        auto &qb = bip.blocks()[b];
        Block blk;
        blk.scale = bip.block_scale(b);
        blk.rel_begin = std::uint32_t(m.rel.size());
        std::vector<std::int32_t> rel;
        for (auto &t : qb.templates)
            for (auto &s : t.slots)
                for (auto &o : s.options)
                    if (o.candidate != BipOption::kNoIndex)
                        rel.push_back(o.candidate);
        std::sort(rel.begin(), rel.end());
        rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
        for (auto c : rel) {
            m.cand_blocks[std::size_t(c)].push_back(std::uint32_t(b));
            m.cand_rels[std::size_t(c)].push_back(std::uint32_t(m.rel.size()));
            m.rel.push_back(c);
            m.rel_block.push_back(std::uint32_t(b));
        }
        blk.rel_end = std::uint32_t(m.rel.size());
        blk.tmpl_begin = std::uint32_t(m.tmpls.size());
        for (auto &t : qb.templates) {
            Tmpl mt{t.beta, std::uint32_t(m.slots.size()), 0};
            for (auto &s : t.slots) {
                Slot ms{std::uint32_t(m.opts.size()), 0};
                for (auto &o : s.options) {
                    std::int32_t r = -1;
                    if (o.candidate != BipOption::kNoIndex) {
                        auto it = std::lower_bound(rel.begin(), rel.end(), o.candidate);
                        r = std::int32_t(blk.rel_begin + std::uint32_t(it - rel.begin()));
                    }
                    m.opts.push_back({o.candidate, r, o.gamma});
                }
                ms.end = std::uint32_t(m.opts.size());
                m.slots.push_back(ms);
            }
            mt.slot_end = std::uint32_t(m.slots.size());
            m.tmpls.push_back(mt);
        }
        blk.tmpl_end = std::uint32_t(m.tmpls.size());
        for (auto &[a, u] : qb.ucost)
            blk.ucost.emplace_back(std::uint32_t(a), u);
        m.blocks.push_back(std::move(blk));
    }

    m.block_crows.resize(m.blocks.size());
    for (auto &row : bip.constraints()) {
        if (row.cost_of_query) {
            CostRow cr{std::uint32_t(*row.cost_of_query), row.rhs, row.name, row.group};
            if (row.cmp != Cmp::Le)
                throw Error(kOrigin, "UnsupportedConstraint", row.name + " bounds a query cost from below");
            m.block_crows[cr.block].push_back(std::uint32_t(m.crows.size()));
            m.crows.push_back(std::move(cr));
            continue;
        }
        ZRow zr;
        zr.name = row.name;
        zr.group = row.group;
        for (auto &t : row.terms) {
            if (t.var >= m.n)
                throw Error(kOrigin, "UnsupportedConstraint", row.name + " mixes plan variables into an index row");
            zr.terms.emplace_back(std::uint32_t(t.var), t.coef);
        }
        auto negated = [](ZRow r) {
            for (auto &t : r.terms)
                t.second = -t.second;
            r.rhs = -r.rhs;
            return r;
        };
        zr.rhs = row.rhs;
        if (row.cmp == Cmp::Le) {
            m.zrows.push_back(std::move(zr));
        } else if (row.cmp == Cmp::Ge) {
            m.zrows.push_back(negated(std::move(zr)));
        } else {
            m.zrows.push_back(zr);
            m.zrows.push_back(negated(std::move(zr)));
        }
    }
    for (std::size_t r = 0; r != m.zrows.size(); ++r) {
        auto &row = m.zrows[r];
        bool nonneg = std::all_of(row.terms.begin(), row.terms.end(), [](auto &t) { return t.second >= 0; });
        if (nonneg && row.terms.size() >= 2 && row.rhs >= 0 &&
            (m.knapsack < 0 || row.terms.size() > m.zrows[std::size_t(m.knapsack)].terms.size()))
            m.knapsack = int(r);
    }
    m.infeasible_groups = bip.infeasible_constraints();
    return m;
}

/*======================================================================================================================
 * Exact evaluation of configurations
 *====================================================================================================================*/

/// Raw block cost; the same summation as BipProblem::block_cost.
double block_cost(const Model &m, std::size_t b, const std::vector<char> &chosen)
{
    auto &blk = m.blocks[b];
    double best = kInf;
    for (auto t = blk.tmpl_begin; t != blk.tmpl_end; ++t) {
        auto &tm = m.tmpls[t];
        double total = 0.0;
        bool ok = true;
        for (auto s = tm.slot_begin; s != tm.slot_end; ++s) {
            double v = kInf;
            for (auto o = m.slots[s].begin; o != m.slots[s].end; ++o) {
                auto &op = m.opts[o];
                if (op.cand < 0 || chosen[std::size_t(op.cand)])
                    v = std::min(v, op.gamma);
            }
            if (!std::isfinite(v)) {
                ok = false;
                break;
            }
            total += v;
        }
        if (ok)
            best = std::min(best, total + tm.beta);
    }
    return best;
}

/// A configuration with cached per-block costs.
struct Config
{
    std::vector<char> chosen;
    std::vector<double> bcost;
};

Config make_config(const Model &m, std::vector<char> chosen)
{
    Config c;
    c.chosen = std::move(chosen);
    c.bcost.resize(m.blocks.size());
    for (std::size_t b = 0; b != m.blocks.size(); ++b)
        c.bcost[b] = block_cost(m, b, c.chosen);
    return c;
}

void toggle(const Model &m, Config &c, std::size_t a, bool on)
{
    c.chosen[a] = on;
    for (auto b : m.cand_blocks[a])
        c.bcost[b] = block_cost(m, b, c.chosen);
}

double objective(const Model &m, const Config &c)
{
    double total = 0.0;
    for (std::size_t b = 0; b != m.blocks.size(); ++b)
        total += m.blocks[b].scale * c.bcost[b];
    for (std::size_t a = 0; a != m.n; ++a)
        if (c.chosen[a])
            total += m.zc[a];
    return total + m.constant;
}

double zrow_activity(const ZRow &row, const std::vector<char> &chosen)
{
    double lhs = 0.0;
    for (auto &[a, w] : row.terms)
        if (chosen[a])
            lhs += w;
    return lhs;
}

double crow_activity(const Model &m, const CostRow &row, const Config &c)
{
    double lhs = c.bcost[row.block];
    for (auto &[a, u] : m.blocks[row.block].ucost)
        if (c.chosen[a])
            lhs += u;
    return lhs;
}

/// Total violation of all rows (0 when feasible).
double violation(const Model &m, const Config &c)
{
    double v = 0.0;
    for (auto &row : m.zrows) {
        double over = zrow_activity(row, c.chosen) - row.rhs;
        if (over > 1e-9)
            v += over;
    }
    for (auto &row : m.crows) {
        double over = crow_activity(m, row, c) - row.rhs;
        if (over > 1e-9)
            v += over;
    }
    return v;
}

bool lex_less(const std::vector<char> &a, const std::vector<char> &b)
{
    for (std::size_t i = 0; i != a.size(); ++i)
        if (a[i] != b[i])
            return a[i] > b[i];   // the set containing the smaller id first is smaller
    return false;
}

/*======================================================================================================================
 * Primal heuristics
 *====================================================================================================================*/

/// Adds candidates that reduce the row violation the most until feasible.
bool repair_by_adding(const Model &m, Config &c, const std::vector<std::int8_t> &fix)
{
    double v = violation(m, c);
    while (v > 0.0) {
        std::size_t best = m.n;
        double best_v = v;
        for (std::size_t a = 0; a != m.n; ++a) {
            if (c.chosen[a] || fix[a] == 0)
                continue;
            toggle(m, c, a, true);
            double nv = violation(m, c);
            toggle(m, c, a, false);
            if (nv < best_v - 1e-12) {
                best_v = nv;
                best = a;
            }
        }
        if (best == m.n)
            return false;
        toggle(m, c, best, true);
        v = best_v;
    }
    return true;
}

/// Removes free members in over-full rows until no <= row is violated.
void repair_by_removing(const Model &m, Config &c, const std::vector<std::int8_t> &fix)
{
    for (auto &row : m.zrows) {
        while (zrow_activity(row, c.chosen) > row.rhs + 1e-9) {
            std::size_t worst = m.n;
            double worst_w = 0.0;
            for (auto &[a, w] : row.terms)
                if (c.chosen[a] && fix[a] != 1 && w > worst_w) {
                    worst_w = w;
                    worst = a;
                }
            if (worst == m.n)
                break;
            toggle(m, c, worst, false);
        }
    }
}

/// Removes members whose removal keeps feasibility and lowers the objective.
void drop_pass(const Model &m, Config &c, const std::vector<std::int8_t> &fix)
{
    double current = objective(m, c);
    for (std::size_t a = 0; a != m.n; ++a) {
        if (!c.chosen[a] || fix[a] == 1)
            continue;
        toggle(m, c, a, false);
        double next = objective(m, c);
        if (next < current - tolerance_for(current) && violation(m, c) == 0.0)
            current = next;
        else
            toggle(m, c, a, true);
    }
}

/// Lazy greedy by benefit/size ratio starting from `c`.
void greedy_add(const Model &m, Config &c, const std::vector<std::int8_t> &fix, const std::atomic<bool> *stop)
{
    // Only nonnegative <= rows can be broken by adding an index.
    std::vector<double> activity(m.zrows.size());
    std::vector<char> guarded(m.zrows.size());
    for (std::size_t r = 0; r != m.zrows.size(); ++r) {
        activity[r] = zrow_activity(m.zrows[r], c.chosen);
        guarded[r] = std::all_of(m.zrows[r].terms.begin(), m.zrows[r].terms.end(),
                                 [](auto &t) { return t.second >= 0; });
    }
    std::vector<std::vector<std::pair<std::uint32_t, double>>> cand_rows(m.n);
    for (std::size_t r = 0; r != m.zrows.size(); ++r)
        if (guarded[r])
            for (auto &[a, w] : m.zrows[r].terms)
                cand_rows[a].emplace_back(std::uint32_t(r), w);
    auto fits = [&](std::size_t a) {
        for (auto &[r, w] : cand_rows[a])
            if (activity[r] + w > m.zrows[r].rhs + 1e-9)
                return false;
        return true;
    };
    auto delta = [&](std::size_t a) {
        double d = m.zc[a];
        c.chosen[a] = 1;
        for (auto b : m.cand_blocks[a])
            d += m.blocks[b].scale * (block_cost(m, b, c.chosen) - c.bcost[b]);
        c.chosen[a] = 0;
        return d;
    };
    auto ratio = [&](std::size_t a, double d) { return -d / std::max(m.size[a], 1.0); };

    using Entry = std::pair<double, std::int64_t>;   // (ratio, -candidate)
    std::priority_queue<Entry> heap;
    for (std::size_t a = 0; a != m.n; ++a) {
        if (c.chosen[a] || fix[a] == 0 || !fits(a))
            continue;
        double d = delta(a);
        if (d < -1e-12)
            heap.push({ratio(a, d), -std::int64_t(a)});
    }
    while (!heap.empty()) {
        if (stop && stop->load())
            return;
        auto [r, neg] = heap.top();
        heap.pop();
        auto a = std::size_t(-neg);
        if (c.chosen[a] || !fits(a))
            continue;
        double d = delta(a);
        if (!(d < -1e-12))
            continue;
        double fresh = ratio(a, d);
        if (!heap.empty() && fresh < heap.top().first) {
            heap.push({fresh, neg});
            continue;
        }
        toggle(m, c, a, true);
        for (auto &[row, w] : cand_rows[a])
            activity[row] += w;
    }
}

/*======================================================================================================================
 * Lagrangian relaxation
 *====================================================================================================================*/

struct Multipliers
{
    std::vector<double> mu;     ///< per Model::rel entry
    std::vector<double> nu;     ///< zrows then crows; the knapsack row keeps 0
};

struct Relaxed
{
    double bound = -kInf;
    bool infeasible = false;
    std::vector<char> used;     ///< per rel entry: x chose the candidate
    std::vector<double> z;
    std::vector<double> raw;    ///< per block: raw cost of the chosen template
    double price = 0.0;         ///< knapsack dual of the z subproblem
};

struct Workspace
{
    std::vector<double> zc;
    std::vector<double> scale;
    std::vector<std::pair<double, std::uint32_t>> items;
};

void evaluate_relaxation(const Model &m, const std::vector<std::int8_t> &fix, const Multipliers &mult,
                         Relaxed &out, Workspace &ws)
{
    out.infeasible = false;
    out.used.assign(m.rel.size(), 0);
    out.z.assign(m.n, 0.0);
    out.raw.assign(m.blocks.size(), 0.0);
    ws.zc = m.zc;
    ws.scale.resize(m.blocks.size());
    double constant = m.constant;

    for (std::size_t r = 0; r != m.zrows.size(); ++r) {
        double nu = mult.nu[r];
        if (nu == 0.0 || int(r) == m.knapsack)
            continue;
        for (auto &[a, w] : m.zrows[r].terms)
            ws.zc[a] += nu * w;
        constant -= nu * m.zrows[r].rhs;
    }
    for (std::size_t b = 0; b != m.blocks.size(); ++b)
        ws.scale[b] = m.blocks[b].scale;
    for (std::size_t r = 0; r != m.crows.size(); ++r) {
        double nu = mult.nu[m.zrows.size() + r];
        if (nu == 0.0)
            continue;
        auto &row = m.crows[r];
        ws.scale[row.block] += nu;
        for (auto &[a, u] : m.blocks[row.block].ucost)
            ws.zc[a] += nu * u;
        constant -= nu * row.rhs;
    }

    double total = constant;
    for (std::size_t b = 0; b != m.blocks.size(); ++b) {
        auto &blk = m.blocks[b];
        double s = ws.scale[b];
        double best = kInf;
        std::uint32_t best_t = 0;
        double best_raw = 0;
        for (auto t = blk.tmpl_begin; t != blk.tmpl_end; ++t) {
            auto &tm = m.tmpls[t];
            double value = s * tm.beta;
            double raw = tm.beta;
            bool ok = true;
            for (auto sl = tm.slot_begin; sl != tm.slot_end && ok; ++sl) {
                double v = kInf, vr = 0;
                for (auto o = m.slots[sl].begin; o != m.slots[sl].end; ++o) {
                    auto &op = m.opts[o];
                    double pen = 0.0;
                    if (op.cand >= 0) {
                        auto f = fix[std::size_t(op.cand)];
                        if (f == 0)
                            continue;
                        if (f < 0)
                            pen = mult.mu[std::size_t(op.rel)];
                    }
                    double c = s * op.gamma + pen;
                    if (c < v) {
                        v = c;
                        vr = op.gamma;
                    }
                }
                if (!std::isfinite(v))
                    ok = false;
                value += v;
                raw += vr;
            }
            if (ok && value < best) {
                best = value;
                best_t = t;
                best_raw = raw;
            }
        }
        if (!std::isfinite(best)) {
            out.infeasible = true;
            out.bound = kInf;
            return;
        }
        total += best;
        out.raw[b] = best_raw;
        // Mark the free candidates x picked in the best template.
        auto &tm = m.tmpls[best_t];
        for (auto sl = tm.slot_begin; sl != tm.slot_end; ++sl) {
            double v = kInf;
            std::int32_t pick = -1;
            for (auto o = m.slots[sl].begin; o != m.slots[sl].end; ++o) {
                auto &op = m.opts[o];
                double pen = 0.0;
                if (op.cand >= 0) {
                    auto f = fix[std::size_t(op.cand)];
                    if (f == 0)
                        continue;
                    if (f < 0)
                        pen = mult.mu[std::size_t(op.rel)];
                }
                double c = s * op.gamma + pen;
                if (c < v) {
                    v = c;
                    pick = op.rel;
                }
            }
            if (pick >= 0 && fix[std::size_t(m.rel[std::size_t(pick)])] < 0)
                out.used[std::size_t(pick)] = 1;
        }
        for (auto r = blk.rel_begin; r != blk.rel_end; ++r)
            if (fix[std::size_t(m.rel[r])] < 0)
                ws.zc[std::size_t(m.rel[r])] -= mult.mu[r];
    }

    // z subproblem: fixed variables are forced; one nonnegative row stays as an LP knapsack.
    double capacity = kInf;
    const ZRow *knap = m.knapsack >= 0 ? &m.zrows[std::size_t(m.knapsack)] : nullptr;
    std::vector<double> weight;
    if (knap) {
        weight.assign(m.n, 0.0);
        for (auto &[a, w] : knap->terms)
            weight[a] = w;
        capacity = knap->rhs;
    }
    for (std::size_t a = 0; a != m.n; ++a)
        if (fix[a] == 1) {
            total += ws.zc[a];
            out.z[a] = 1.0;
            if (knap)
                capacity -= weight[a];
        }
    if (knap && capacity < -1e-9) {
        out.infeasible = true;
        out.bound = kInf;
        return;
    }
    ws.items.clear();
    for (std::size_t a = 0; a != m.n; ++a) {
        if (fix[a] != -1 || !(ws.zc[a] < 0.0))
            continue;
        if (!knap || weight[a] <= 0.0) {
            total += ws.zc[a];
            out.z[a] = 1.0;
        } else {
            ws.items.push_back({-ws.zc[a] / weight[a], std::uint32_t(a)});
        }
    }
    std::sort(ws.items.begin(), ws.items.end(), [](auto &x, auto &y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    double full = knap ? 1e-12 * std::max(1.0, std::abs(knap->rhs)) : 0.0;
    out.price = capacity <= full && !ws.items.empty() ? ws.items.front().first : 0.0;
    for (auto &[ratio, a] : ws.items) {
        if (capacity <= full)
            break;
        double take = std::min(1.0, capacity / weight[a]);
        total += take * ws.zc[a];
        out.z[a] = take;
        capacity -= take * weight[a];
        if (capacity <= full)
            out.price = ratio;
    }

    out.bound = total;
}

/// Called every few subgradient iterations with the current relaxed
/// solution; returns a (possibly) better upper bound.
using PrimalProbe = std::function<double(const Relaxed &)>;

constexpr int kProbeEvery = 100;

/// Subgradient optimization; returns the best bound and leaves the best multipliers in `mult`.
double optimize_bound(const Model &m, const std::vector<std::int8_t> &fix, Multipliers &mult, double upper,
                      int iterations, int patience, Relaxed &best_relaxed, Workspace &ws,
                      const PrimalProbe &probe = {})
{
    Relaxed cur;
    evaluate_relaxation(m, fix, mult, cur, ws);
    if (cur.infeasible) {
        best_relaxed = cur;
        return kInf;
    }
    double best = cur.bound;
    best_relaxed = cur;
    Multipliers best_mult = mult;
    double step = 2.0;
    int stall = 0;
    std::vector<double> gmu(m.rel.size()), gnu(m.dual_count());
    for (int it = 0; it < iterations; ++it) {
        if (probe && it > 0 && it % kProbeEvery == 0)
            upper = std::min(upper, probe(best_relaxed));
        if (best >= upper - tolerance_for(upper))
            break;
        double norm = 0.0;
        for (std::size_t r = 0; r != m.rel.size(); ++r) {
            auto a = std::size_t(m.rel[r]);
            gmu[r] = fix[a] < 0 ? double(cur.used[r]) - cur.z[a] : 0.0;
            if (gmu[r] < 0 && mult.mu[r] <= 0)
                gmu[r] = 0;
            norm += gmu[r] * gmu[r];
        }
        for (std::size_t r = 0; r != m.zrows.size(); ++r) {
            double g = 0;
            if (int(r) != m.knapsack) {
                g = -m.zrows[r].rhs;
                for (auto &[a, w] : m.zrows[r].terms)
                    g += w * cur.z[a];
                if (g < 0 && mult.nu[r] <= 0)
                    g = 0;
            }
            gnu[r] = g;
            norm += g * g;
        }
        for (std::size_t r = 0; r != m.crows.size(); ++r) {
            auto &row = m.crows[r];
            double g = cur.raw[row.block] - row.rhs;
            for (auto &[a, u] : m.blocks[row.block].ucost)
                g += u * cur.z[a];
            auto k = m.zrows.size() + r;
            if (g < 0 && mult.nu[k] <= 0)
                g = 0;
            gnu[k] = g;
            norm += g * g;
        }
        if (norm <= 1e-18)
            break;
        double target = std::isfinite(upper) ? upper : cur.bound + std::max(1.0, 0.05 * std::abs(cur.bound));
        double t = step * std::max(target - cur.bound, 1e-9 * std::max(1.0, std::abs(target))) / norm;
        for (std::size_t r = 0; r != m.rel.size(); ++r)
            mult.mu[r] = std::max(0.0, mult.mu[r] + t * gmu[r]);
        for (std::size_t k = 0; k != gnu.size(); ++k)
            mult.nu[k] = std::max(0.0, mult.nu[k] + t * gnu[k]);
        evaluate_relaxation(m, fix, mult, cur, ws);
        if (cur.infeasible) {
            best_relaxed = cur;
            return kInf;
        }
        if (cur.bound > best + 1e-12 * std::max(1.0, std::abs(best))) {
            best = cur.bound;
            best_mult = mult;
            best_relaxed = cur;
            stall = 0;
        } else if (++stall >= patience) {
            step *= 0.5;
            stall = 0;
        }
    }
    mult = std::move(best_mult);
    return best;
}

/*======================================================================================================================
 * Propagation
 *====================================================================================================================*/

/// Fixes variables implied by the z rows; false when the node is infeasible.
bool propagate(const Model &m, std::vector<std::int8_t> &fix)
{
    if (!m.infeasible_groups.empty())
        return false;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto &row : m.zrows) {
            double min_act = 0.0;
            for (auto &[a, w] : row.terms)
                if (fix[a] == 1 || (fix[a] == -1 && w < 0))
                    min_act += w;
            double tol = tolerance_for(row.rhs);
            if (min_act > row.rhs + tol)
                return false;
            for (auto &[a, w] : row.terms) {
                if (fix[a] != -1)
                    continue;
                if (w > 0 && min_act + w > row.rhs + tol) {
                    fix[a] = 0;
                    changed = true;
                } else if (w < 0 && min_act - w > row.rhs + tol) {
                    fix[a] = 1;
                    min_act -= w;
                    changed = true;
                }
            }
        }
    }
    if (!m.crows.empty()) {
        std::vector<char> allowed(m.n);
        for (std::size_t a = 0; a != m.n; ++a)
            allowed[a] = fix[a] != 0;
        for (auto &row : m.crows) {
            double lhs = block_cost(m, row.block, allowed);
            for (auto &[a, u] : m.blocks[row.block].ucost)
                if (fix[a] == 1)
                    lhs += u;
            if (lhs > row.rhs + tolerance_for(row.rhs))
                return false;
        }
    }
    return true;
}

/*======================================================================================================================
 * Feasibility search
 *====================================================================================================================*/

struct FeasibilitySearch
{
    const Model &m;
    std::uint64_t budget;
    std::uint64_t nodes = 0;
    bool exhausted = false;

    bool completion_feasible(const std::vector<std::int8_t> &fix, bool value)
    {
        std::vector<char> chosen(m.n);
        for (std::size_t a = 0; a != m.n; ++a)
            chosen[a] = fix[a] == 1 || (fix[a] == -1 && value);
        return violation(m, make_config(m, chosen)) == 0.0;
    }

    bool run(std::vector<std::int8_t> fix)
    {
        if (++nodes > budget) {
            exhausted = true;
            return false;
        }
        if (!propagate(m, fix))
            return false;
        if (completion_feasible(fix, false) || completion_feasible(fix, true))
            return true;
        std::size_t pick = m.n;
        for (std::size_t a = 0; a != m.n && pick == m.n; ++a)
            if (fix[a] == -1)
                pick = a;
        if (pick == m.n)
            return false;
        for (std::int8_t v : {std::int8_t(1), std::int8_t(0)}) {
            auto child = fix;
            child[pick] = v;
            if (run(std::move(child)))
                return true;
            if (exhausted)
                return false;
        }
        return false;
    }
};

/// Model restricted to the rows whose group is in `active`.
Model restrict_rows(const Model &full, const std::set<std::string> &active)
{
    Model m = full;
    std::erase_if(m.zrows, [&](auto &r) { return !r.group.empty() && !active.count(r.group); });
    std::erase_if(m.crows, [&](auto &r) { return !r.group.empty() && !active.count(r.group); });
    std::erase_if(m.infeasible_groups, [&](auto &g) { return !active.count(g); });
    m.block_crows.assign(m.blocks.size(), {});
    for (std::size_t r = 0; r != m.crows.size(); ++r)
        m.block_crows[m.crows[r].block].push_back(std::uint32_t(r));
    m.knapsack = -1;
    return m;
}

std::pair<bool, bool> feasible_model(const Model &m, std::uint64_t budget)
{
    if (!m.infeasible_groups.empty())
        return {false, true};
    FeasibilitySearch search{m, budget};
    bool ok = search.run(std::vector<std::int8_t>(m.n, -1));
    return {ok || search.exhausted, !search.exhausted};
}

FeasibilityReport check_model(const Model &m)
{
    constexpr std::uint64_t kBudget = 200000;
    FeasibilityReport report;
    auto [ok, decided] = feasible_model(m, kBudget);
    report.feasible = ok;
    report.decided = decided;
    if (ok)
        return report;

    // Deletion filter over constraint statements.
    std::vector<std::string> groups;
    auto note = [&](const std::string &g) {
        if (!g.empty() && g != "clustered" && std::find(groups.begin(), groups.end(), g) == groups.end())
            groups.push_back(g);
    };
    for (auto &g : m.infeasible_groups)
        note(g);
    for (auto &r : m.zrows)
        note(r.group);
    for (auto &r : m.crows)
        note(r.group);
    std::set<std::string> active(groups.begin(), groups.end());
    active.insert("clustered");
    for (auto &g : groups) {
        active.erase(g);
        auto [still_ok, still_decided] = feasible_model(restrict_rows(m, active), kBudget);
        if (still_ok || !still_decided)
            active.insert(g);
    }
    for (auto &g : groups)
        if (active.count(g))
            report.conflicting.push_back(g);
    return report;
}

/*======================================================================================================================
 * Branch and bound
 *====================================================================================================================*/

/// Stable key of every z row: its name plus the occurrence among rows of that name.
std::vector<std::string> zrow_keys(const Model &m)
{
    std::map<std::string, int> seen;
    std::vector<std::string> keys;
    for (auto &row : m.zrows)
        keys.push_back(row.name + "#" + std::to_string(seen[row.name]++));
    return keys;
}

SolverState::Signature signature_of(const Model &m)
{
    SolverState::Signature sig;
    auto &cands = m.bip->candidates();
    sig.constant = m.constant;
    for (std::size_t b = 0; b != m.blocks.size(); ++b)
        sig.block_scale[m.bip->blocks()[b].statement_id] = m.blocks[b].scale;
    for (std::size_t a = 0; a != m.n; ++a)
        sig.z_coefficient[cands[a].id] = m.zc[a];
    auto keys = zrow_keys(m);
    for (std::size_t r = 0; r != m.zrows.size(); ++r) {
        if (m.zrows[r].cover)
            continue;
        auto &entry = sig.z_rows[keys[r]];
        entry.first = m.zrows[r].rhs;
        for (auto &[a, w] : m.zrows[r].terms)
            entry.second[cands[a].id] += w;
    }
    for (auto &row : m.crows)
        sig.cost_rows[row.name] = {m.bip->blocks()[row.block].statement_id, row.rhs};
    return sig;
}

/// Configurations that avoid every `fresh` candidate were already searched
/// exhaustively; `config` is the best of them.
struct KnownRegion
{
    std::vector<char> fresh;
    std::vector<char> config;
    double value;
};

bool same_value(double a, double b)
{
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// The configurations over old candidates keep their objective and gain no
/// feasibility when every old row survives unchanged on those candidates
/// (or can no longer bind) and the objective coefficients match.
std::optional<KnownRegion> known_region(const SolverState &state, const Model &m)
{
    if (!state.proven)
        return std::nullopt;
    auto &old = state.signature;
    auto now = signature_of(m);
    if (!same_value(old.constant, now.constant) || old.block_scale.size() != now.block_scale.size())
        return std::nullopt;
    for (auto &[stmt, scale] : old.block_scale) {
        auto it = now.block_scale.find(stmt);
        if (it == now.block_scale.end() || !same_value(it->second, scale))
            return std::nullopt;
    }
    KnownRegion known{std::vector<char>(m.n, 0), std::vector<char>(m.n, 0), state.incumbent_objective};
    for (std::size_t a = 0; a != m.n; ++a) {
        auto &id = m.bip->candidates()[a].id;
        auto it = old.z_coefficient.find(id);
        if (it == old.z_coefficient.end())
            known.fresh[a] = 1;
        else if (!same_value(it->second, m.zc[a]))
            return std::nullopt;
    }
    for (auto &[key, row] : old.z_rows) {
        double reach = 0.0;
        std::map<std::string, double> kept;
        for (auto &[id, w] : row.second)
            if (now.z_coefficient.count(id)) {
                kept[id] = w;
                reach += std::max(0.0, w);
            }
        if (reach <= row.first)
            continue;
        auto it = now.z_rows.find(key);
        if (it == now.z_rows.end() || !same_value(it->second.first, row.first))
            return std::nullopt;
        for (auto &[id, w] : kept) {
            auto t = it->second.second.find(id);
            if (t == it->second.second.end() || !same_value(t->second, w))
                return std::nullopt;
        }
        for (auto &[id, w] : it->second.second)
            if (old.z_coefficient.count(id) && !kept.count(id))
                return std::nullopt;
    }
    for (auto &[name, row] : old.cost_rows) {
        auto it = now.cost_rows.find(name);
        if (it == now.cost_rows.end() || it->second.first != row.first || !same_value(it->second.second, row.second))
            return std::nullopt;
    }
    for (auto &id : state.incumbent_ids) {
        auto a = m.bip->candidate_index(id);
        if (!a)
            return std::nullopt;
        known.config[*a] = 1;
    }
    auto c = make_config(m, known.config);
    if (violation(m, c) > 0.0)
        return std::nullopt;
    known.value = objective(m, c);
    return known;
}

struct Node
{
    std::uint64_t id;
    double bound;
    std::vector<std::int8_t> fix;
    std::shared_ptr<const Multipliers> mult;
};

struct NodeOrder
{
    bool operator()(const Node &a, const Node &b) const
    {
        return a.bound != b.bound ? a.bound > b.bound : a.id > b.id;
    }
};

struct NodeResult
{
    bool infeasible = false;
    double bound = kInf;
    std::vector<std::int8_t> fix;           ///< after propagation
    std::shared_ptr<const Multipliers> mult;
    std::optional<std::vector<char>> primal;
    double primal_value = kInf;
    std::size_t branch = 0;
    bool leaf = false;
};

class BranchAndBound
{
public:
    BranchAndBound(const Model &m, const SolverOptions &opts) : m_(m), opts_(opts) { }

    void assume(std::optional<KnownRegion> known) { known_ = std::move(known); }

    Solution run(std::optional<std::vector<char>> warm_incumbent, std::shared_ptr<const Multipliers> warm_mult,
                 SolverState *state)
    {
        start_ = Clock::now();
        Solution sol;

        if (known_)
            offer(known_->config, known_->value);
        auto report = known_ ? FeasibilityReport{} : check_model(m_);
        if (!report.feasible) {
            sol.status = SolveStatus::Infeasible;
            sol.conflicting_constraints = report.conflicting;
            sol.elapsed_ms = elapsed_ms();
            return sol;
        }

        std::vector<std::int8_t> root(m_.n, -1);
        bool root_ok = propagate(m_, root);

        // Initial incumbents: the warm start, then greedy from it or from the empty set.
        if (root_ok) {
            std::vector<std::vector<char>> seeds;
            if (warm_incumbent)
                seeds.push_back(*warm_incumbent);
            seeds.push_back(std::vector<char>(m_.n, 0));
            for (auto &seed : seeds) {
                for (std::size_t a = 0; a != m_.n; ++a)
                    if (root[a] == 0)
                        seed[a] = 0;
                    else if (root[a] == 1)
                        seed[a] = 1;
                auto c = make_config(m_, seed);
                repair_by_removing(m_, c, root);
                if (violation(m_, c) > 0.0 && !repair_by_adding(m_, c, root))
                    continue;
                offer(c.chosen, objective(m_, c));
                greedy_add(m_, c, root, opts_.stop);
                drop_pass(m_, c, root);
                if (violation(m_, c) == 0.0)
                    offer(c.chosen, objective(m_, c));
                if (warm_incumbent && has_incumbent_)
                    break;
            }
        }

        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        auto mult = warm_mult ? warm_mult : std::make_shared<const Multipliers>(zero_multipliers());
        if (root_ok)
            open.push(Node{next_id_++, -kInf, root, mult});

        bool first = true;
        bool stopped = false, user_stop = false;
        while (!open.empty()) {
            if (opts_.stop && opts_.stop->load()) {
                stopped = user_stop = true;
                break;
            }
            if (opts_.time_limit && elapsed_ms() > *opts_.time_limit * 1000.0) {
                stopped = true;
                break;
            }
            if (opts_.node_limit && nodes_ >= *opts_.node_limit) {
                stopped = true;
                break;
            }

            std::vector<Node> batch;
            std::size_t width = first ? 1 : std::max<std::size_t>(1, opts_.batch_size);
            while (!open.empty() && batch.size() < width) {
                auto node = open.top();
                open.pop();
                if (pruned(node.bound))
                    continue;
                batch.push_back(std::move(node));
            }
            if (batch.empty())
                break;

            double upper = prune_level();
            int iterations = first ? opts_.root_iterations : opts_.node_iterations;
            std::vector<NodeResult> results(batch.size());
            auto work = [&](std::size_t i) { results[i] = evaluate(batch[i], upper, iterations); };
            unsigned threads = std::max(1u, opts_.threads);
            if (threads == 1 || batch.size() == 1) {
                for (std::size_t i = 0; i != batch.size(); ++i)
                    work(i);
            } else {
                std::vector<std::thread> pool;
                auto count = std::min<std::size_t>(threads, batch.size());
                for (std::size_t t = 0; t != count; ++t)
                    pool.emplace_back([&, t] {
                        for (std::size_t i = t; i < batch.size(); i += count)
                            work(i);
                    });
                for (auto &th : pool)
                    th.join();
            }

            for (std::size_t i = 0; i != batch.size(); ++i) {
                auto &node = batch[i];
                auto &res = results[i];
                ++nodes_;
                if (res.primal)
                    offer(*res.primal, res.primal_value);
                if (res.infeasible)
                    continue;
                double bound = std::max(res.bound, node.bound);
                if (first)
                    root_bound_ = bound;
                if (opts_.node_observer)
                    opts_.node_observer(NodeRecord{res.fix, bound});
                if (res.leaf)
                    continue;
                if (pruned(bound))
                    continue;
                for (std::int8_t v : {std::int8_t(1), std::int8_t(0)}) {
                    auto fix = res.fix;
                    fix[res.branch] = v;
                    open.push(Node{next_id_++, bound, std::move(fix), res.mult});
                }
            }
            last_mult_ = results.front().mult ? results.front().mult : last_mult_;
            if (first && results.front().mult)
                root_mult_ = results.front().mult;
            first = false;

            double lb = open_bound(open);
            update_lower(lb);
            emit();
            if (has_incumbent_ && !open.empty() && gap() <= opts_.gap_threshold)
                break;
        }

        bool exhausted = open.empty() && !stopped;
        sol.cutoff_reached = exhausted && opts_.cutoff &&
                             (!has_incumbent_ || incumbent_value_ >= *opts_.cutoff - tolerance_for(*opts_.cutoff));
        if (!has_incumbent_ && sol.cutoff_reached) {
            sol.status = SolveStatus::GapReached;
            sol.objective = kInf;
            sol.lower_bound = *opts_.cutoff;
            sol.nodes_explored = nodes_;
            sol.elapsed_ms = elapsed_ms();
            return sol;
        }
        if (!has_incumbent_) {
            sol.status = stopped ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
            sol.stopped_by_user = user_stop;
            if (!stopped)
                sol.conflicting_constraints = check_model(m_).conflicting;
            sol.lower_bound = lower_;
            sol.nodes_explored = nodes_;
            sol.elapsed_ms = elapsed_ms();
            return sol;
        }
        if (sol.cutoff_reached)
            update_lower(*opts_.cutoff);
        else if (exhausted)
            update_lower(incumbent_value_);
        else
            update_lower(open_bound(open));
        lower_ = std::min(lower_, incumbent_value_);
        double g = gap();
        if (exhausted && !sol.cutoff_reached)
            sol.status = SolveStatus::Optimal;
        else if (sol.cutoff_reached)
            sol.status = g <= 0.0 ? SolveStatus::Optimal : SolveStatus::GapReached;
        else if (stopped && g > opts_.gap_threshold)
            sol.status = SolveStatus::TimeLimit;
        else
            sol.status = g <= 0.0 ? SolveStatus::Optimal : SolveStatus::GapReached;
        if (sol.status == SolveStatus::Optimal) {
            lower_ = incumbent_value_;
            g = 0.0;
        }
        sol.stopped_by_user = user_stop;
        emit(true);

        for (std::size_t a = 0; a != m_.n; ++a)
            if (incumbent_[a]) {
                sol.chosen.push_back(a);
                sol.chosen_ids.push_back(m_.bip->candidates()[a].id);
            }
        sol.assignment = assignment_for(*m_.bip, incumbent_);
        sol.objective = incumbent_value_;
        sol.lower_bound = lower_;
        sol.gap = g;
        sol.nodes_explored = nodes_;
        sol.elapsed_ms = elapsed_ms();

        if (state) {
            state->valid = true;
            state->incumbent_ids = sol.chosen_ids;
            state->incumbent_objective = sol.objective;
            state->open_nodes = open.size();
            state->proven = sol.status == SolveStatus::Optimal;
            state->signature = signature_of(m_);
            state->link_multipliers.clear();
            state->row_multipliers.clear();
            auto mult = root_mult_ ? root_mult_ : last_mult_;
            if (mult) {
                for (std::size_t r = 0; r != m_.rel.size(); ++r)
                    if (mult->mu[r] != 0.0)
                        state->link_multipliers[{m_.bip->blocks()[m_.rel_block[r]].statement_id,
                                                 m_.bip->candidates()[std::size_t(m_.rel[r])].id}] = mult->mu[r];
                auto keys = zrow_keys(m_);
                for (std::size_t r = 0; r != m_.zrows.size(); ++r)
                    if (mult->nu[r] != 0.0 && !m_.zrows[r].cover)
                        state->row_multipliers[keys[r]] = mult->nu[r];
                for (std::size_t r = 0; r != m_.crows.size(); ++r)
                    if (mult->nu[m_.zrows.size() + r] != 0.0)
                        state->row_multipliers[m_.crows[r].name] = mult->nu[m_.zrows.size() + r];
            }
            state->last = sol;
        }
        return sol;
    }

    Multipliers zero_multipliers() const
    {
        return Multipliers{std::vector<double>(m_.rel.size(), 0.0), std::vector<double>(m_.dual_count(), 0.0)};
    }

private:
    NodeResult evaluate(const Node &node, double upper, int iterations) const
    {
        NodeResult res;
        res.fix = node.fix;
        if (!propagate(m_, res.fix)) {
            res.infeasible = true;
            return res;
        }
        bool all_fixed = std::none_of(res.fix.begin(), res.fix.end(), [](auto f) { return f == -1; });
        if (all_fixed) {
            std::vector<char> chosen(m_.n);
            for (std::size_t a = 0; a != m_.n; ++a)
                chosen[a] = res.fix[a] == 1;
            auto c = make_config(m_, chosen);
            res.leaf = true;
            if (violation(m_, c) > 0.0) {
                res.infeasible = true;
                return res;
            }
            res.bound = objective(m_, c);
            res.primal = std::move(c.chosen);
            res.primal_value = res.bound;
            return res;
        }

        Workspace ws;
        Relaxed relaxed;
        auto mult = std::make_shared<Multipliers>(*node.mult);
        auto keep = [&](const Relaxed &r) {
            if (auto p = primal_from(r, res.fix); p && p->second < res.primal_value) {
                res.primal = std::move(p->first);
                res.primal_value = p->second;
            }
            return res.primal_value;
        };
        double bound = optimize_bound(m_, res.fix, *mult, upper, iterations, opts_.patience, relaxed, ws, keep);
        if (!std::isfinite(bound) && bound > 0) {
            res.infeasible = true;
            return res;
        }
        res.bound = bound;
        res.mult = mult;
        upper = std::min(upper, res.primal_value);

        if (std::isfinite(upper) && fix_by_bound(res.fix, *mult, upper, relaxed, ws)) {
            if (!propagate(m_, res.fix)) {
                res.infeasible = true;
                return res;
            }
            if (std::none_of(res.fix.begin(), res.fix.end(), [](auto f) { return f == -1; })) {
                std::vector<char> chosen(m_.n);
                for (std::size_t a = 0; a != m_.n; ++a)
                    chosen[a] = res.fix[a] == 1;
                auto c = make_config(m_, chosen);
                res.leaf = true;
                if (violation(m_, c) > 0.0) {
                    res.infeasible = true;
                    return res;
                }
                double value = objective(m_, c);
                res.bound = std::max(bound, value);
                if (value < res.primal_value) {
                    res.primal = std::move(c.chosen);
                    res.primal_value = value;
                }
                return res;
            }
        }

        keep(relaxed);

        // Branch on the free candidate the relaxation values most.
        std::vector<double> score(m_.n, 0.0);
        std::vector<char> conflict(m_.n, 0);
        for (std::size_t r = 0; r != m_.rel.size(); ++r) {
            auto a = std::size_t(m_.rel[r]);
            if (res.fix[a] != -1)
                continue;
            score[a] += mult->mu[r];
            if (double(relaxed.used[r]) != relaxed.z[a])
                conflict[a] = 1;
        }
        for (std::size_t a = 0; a != m_.n; ++a)
            if (res.fix[a] == -1 && relaxed.z[a] > 0 && relaxed.z[a] < 1)
                conflict[a] = 1;
        std::size_t pick = m_.n;
        for (int pass = 0; pass != 2 && pick == m_.n; ++pass)
            for (std::size_t a = 0; a != m_.n; ++a) {
                if (res.fix[a] != -1 || (pass == 0 && !conflict[a]))
                    continue;
                if (pick == m_.n || score[a] > score[pick])
                    pick = a;
            }
        res.branch = pick;
        return res;
    }

    /// Rounds a relaxed solution to a feasible configuration, if it can.
    std::optional<std::pair<std::vector<char>, double>> primal_from(const Relaxed &relaxed,
                                                                    const std::vector<std::int8_t> &fix) const
    {
        std::vector<char> chosen(m_.n, 0);
        for (std::size_t a = 0; a != m_.n; ++a)
            chosen[a] = fix[a] == 1 || (fix[a] == -1 && relaxed.z[a] > 0.5);
        for (std::size_t r = 0; r != m_.rel.size(); ++r)
            if (relaxed.used[r])
                chosen[std::size_t(m_.rel[r])] = 1;
        auto c = make_config(m_, chosen);
        repair_by_removing(m_, c, fix);
        if (violation(m_, c) > 0.0 && !repair_by_adding(m_, c, fix))
            return std::nullopt;
        drop_pass(m_, c, fix);
        if (violation(m_, c) > 0.0)
            return std::nullopt;
        double value = objective(m_, c);
        return std::make_pair(std::move(c.chosen), value);
    }

    /// Fixes every free candidate whose flip would lift the Lagrangian bound
    /// to the incumbent.  With the knapsack dual held fixed each candidate
    /// contributes min(0, reduced cost) independently, so a flip costs at
    /// least the change in that term.  Returns true when anything was fixed.
    bool fix_by_bound(std::vector<std::int8_t> &fix, const Multipliers &mult, double upper, Relaxed &relaxed,
                      Workspace &ws) const
    {
        evaluate_relaxation(m_, fix, mult, relaxed, ws);
        if (relaxed.infeasible)
            return false;
        double bound = relaxed.bound;
        double limit = upper - tolerance_for(upper);
        std::vector<double> weight(m_.n, 0.0);
        if (m_.knapsack >= 0)
            for (auto &[a, w] : m_.zrows[std::size_t(m_.knapsack)].terms)
                weight[a] = w;
        bool changed = false;
        for (std::size_t a = 0; a != m_.n; ++a) {
            if (fix[a] != -1)
                continue;
            double rc = ws.zc[a] + relaxed.price * weight[a];
            double up = bound + std::max(0.0, rc);
            double down = bound - std::min(0.0, rc);
            if (up >= limit) {
                fix[a] = 0;
                changed = true;
            } else if (down >= limit) {
                fix[a] = 1;
                changed = true;
            }
        }
        return changed;
    }

    /// The incumbent value, lowered to the cutoff when one is set.
    double prune_level() const
    {
        double level = has_incumbent_ ? incumbent_value_ : kInf;
        if (opts_.cutoff)
            level = std::min(level, *opts_.cutoff);
        return level;
    }

    bool pruned(double bound) const
    {
        double level = prune_level();
        return std::isfinite(level) && bound >= level - tolerance_for(level);
    }

    void offer(const std::vector<char> &chosen, double value)
    {
        double tol = tolerance_for(incumbent_value_);
        bool better = !has_incumbent_ || value < incumbent_value_ - tol;
        bool tie = has_incumbent_ && !better && value <= incumbent_value_ + tol && lex_less(chosen, incumbent_);
        if (!better && !tie)
            return;
        has_incumbent_ = true;
        incumbent_ = chosen;
        incumbent_value_ = better ? value : std::min(value, incumbent_value_);
    }

    double open_bound(const std::priority_queue<Node, std::vector<Node>, NodeOrder> &open) const
    {
        if (open.empty())
            return has_incumbent_ ? incumbent_value_ : lower_;
        return open.top().bound;
    }

    void update_lower(double lb)
    {
        if (std::isfinite(lb) && lb > lower_)
            lower_ = lb;
        if (has_incumbent_ && lower_ > incumbent_value_)
            lower_ = incumbent_value_;
    }

    double gap() const
    {
        if (!has_incumbent_)
            return kInf;
        return std::max(0.0, (incumbent_value_ - lower_) / std::max(std::abs(incumbent_value_), 1e-12));
    }

    double elapsed_ms() const
    {
        return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    }

    void emit(bool final = false)
    {
        if (!opts_.progress)
            return;
        ProgressEvent e;
        e.elapsed_ms = elapsed_ms();
        e.incumbent = has_incumbent_ ? incumbent_value_ : kInf;
        e.lower_bound = std::isfinite(lower_) ? lower_ : -kInf;
        e.gap = gap();
        e.nodes_explored = nodes_;
        if (!final && last_emitted_ && last_emitted_->incumbent == e.incumbent &&
            last_emitted_->lower_bound == e.lower_bound)
            return;
        // Monotone stream: never report a worse incumbent or a lower bound.
        if (last_emitted_) {
            e.incumbent = std::min(e.incumbent, last_emitted_->incumbent);
            e.lower_bound = std::max(e.lower_bound, last_emitted_->lower_bound);
        }
        last_emitted_ = e;
        opts_.progress(e);
    }

    const Model &m_;
    const SolverOptions &opts_;
    Clock::time_point start_;
    std::uint64_t next_id_ = 0;
    std::uint64_t nodes_ = 0;
    bool has_incumbent_ = false;
    std::vector<char> incumbent_;
    double incumbent_value_ = kInf;
    double lower_ = -kInf;
    double root_bound_ = -kInf;
    std::shared_ptr<const Multipliers> root_mult_;
    std::shared_ptr<const Multipliers> last_mult_;
    std::optional<ProgressEvent> last_emitted_;
    std::optional<KnownRegion> known_;
};

}

/*======================================================================================================================
 * Public entry points
 *====================================================================================================================*/

const char * to_string(SolveStatus status)
{
    switch (status) {
        case SolveStatus::Optimal: return "OPTIMAL";
        case SolveStatus::GapReached: return "GAP_REACHED";
        case SolveStatus::TimeLimit: return "TIME_LIMIT";
        case SolveStatus::Infeasible: return "INFEASIBLE";
    }
    return "?";
}

FeasibilityReport check_feasibility(const BipProblem &bip)
{
    return check_model(build_model(bip));
}

double lagrangian_bound(const BipProblem &bip, int iterations, std::optional<double> upper)
{
    auto m = build_model(bip);
    std::vector<std::int8_t> fix(m.n, -1);
    if (!propagate(m, fix))
        return kInf;
    Multipliers mult{std::vector<double>(m.rel.size(), 0.0), std::vector<double>(m.dual_count(), 0.0)};
    Workspace ws;
    Relaxed relaxed;
    return optimize_bound(m, fix, mult, upper.value_or(kInf), iterations, 5, relaxed, ws);
}

std::vector<std::uint8_t> assignment_for(const BipProblem &bip, const std::vector<char> &chosen)
{
    std::vector<std::uint8_t> v(bip.variable_count(), 0);
    for (std::size_t a = 0; a != bip.candidates().size(); ++a)
        v[a] = chosen[a] ? 1 : 0;
    for (std::size_t b = 0; b != bip.blocks().size(); ++b) {
        auto &qb = bip.blocks()[b];
        double best = kInf;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k != qb.templates.size(); ++k) {
            auto &t = qb.templates[k];
            double total = 0.0;
            bool ok = true;
            for (auto &s : t.slots) {
                double m = kInf;
                for (auto &o : s.options)
                    if (o.candidate == BipOption::kNoIndex || chosen[std::size_t(o.candidate)])
                        m = std::min(m, o.gamma);
                if (!std::isfinite(m)) {
                    ok = false;
                    break;
                }
                total += m;
            }
            if (ok && total + t.beta < best) {
                best = total + t.beta;
                best_k = k;
            }
        }
        auto &t = qb.templates[best_k];
        v[t.y_var] = 1;
        for (auto &s : t.slots) {
            double m = kInf;
            std::size_t pick = 0;
            for (std::size_t o = 0; o != s.options.size(); ++o) {
                auto c = s.options[o].candidate;
                if ((c == BipOption::kNoIndex || chosen[std::size_t(c)]) && s.options[o].gamma < m) {
                    m = s.options[o].gamma;
                    pick = o;
                }
            }
            v[s.first_var + pick] = 1;
        }
    }
    return v;
}

Solution solve(const BipProblem &bip, const SolverOptions &options, SolverState *state)
{
    auto m = build_model(bip);
    BranchAndBound bb(m, options);
    return bb.run(std::nullopt, nullptr, state);
}

Solution resolve_delta(SolverState &state, const BipProblem &modified, const SolverOptions &options)
{
    if (!state.valid)
        throw Error(kOrigin, "StaleState", "no previous solve to warm-start from");
    auto m = build_model(modified);

    std::vector<char> warm(m.n, 0);
    for (auto &id : state.incumbent_ids)
        if (auto a = modified.candidate_index(id))
            warm[*a] = 1;

    // With the old region settled, only configurations using a new candidate remain.
    auto known = known_region(state, m);
    if (known) {
        ZRow cover;
        cover.name = "(fresh)";
        cover.cover = true;
        cover.rhs = -1.0;
        for (std::size_t a = 0; a != m.n; ++a)
            if (known->fresh[a])
                cover.terms.emplace_back(std::uint32_t(a), -1.0);
        m.zrows.push_back(std::move(cover));
    }

    // Multipliers are in objective units, so they follow the statement weights.
    std::vector<double> ratio(modified.blocks().size(), 1.0);
    double old_total = 0, new_total = 0;
    for (std::size_t b = 0; b != ratio.size(); ++b) {
        auto &id = modified.blocks()[b].statement_id;
        auto it = state.signature.block_scale.find(id);
        if (it == state.signature.block_scale.end())
            continue;
        double now = modified.block_scale(b);
        old_total += std::abs(it->second);
        new_total += std::abs(now);
        if (it->second > 0 && now > 0)
            ratio[b] = now / it->second;
    }
    double row_ratio = old_total > 0 && new_total > 0 ? new_total / old_total : 1.0;

    BranchAndBound bb(m, options);
    auto mult = std::make_shared<Multipliers>(bb.zero_multipliers());
    for (std::size_t r = 0; r != m.rel.size(); ++r) {
        auto key = std::make_pair(modified.blocks()[m.rel_block[r]].statement_id,
                                  modified.candidates()[std::size_t(m.rel[r])].id);
        if (auto it = state.link_multipliers.find(key); it != state.link_multipliers.end())
            mult->mu[r] = it->second * ratio[m.rel_block[r]];
    }
    auto keys = zrow_keys(m);
    for (std::size_t r = 0; r != m.zrows.size(); ++r)
        if (auto it = state.row_multipliers.find(keys[r]); it != state.row_multipliers.end())
            mult->nu[r] = it->second * row_ratio;
    for (std::size_t r = 0; r != m.crows.size(); ++r)
        if (auto it = state.row_multipliers.find(m.crows[r].name); it != state.row_multipliers.end())
            mult->nu[m.zrows.size() + r] = it->second * ratio[m.crows[r].block];

    bb.assume(std::move(known));
    return bb.run(warm, mult, &state);
}

}
