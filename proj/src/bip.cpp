#include <ixt/bip.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <cmath>

namespace ixt {

namespace {

constexpr const char *kOrigin = "bipmodel";

}

const char * to_string(Cmp cmp)
{
    switch (cmp) {
        case Cmp::Le: return "<=";
        case Cmp::Eq: return "=";
        case Cmp::Ge: return ">=";
    }
    return "?";
}

/*======================================================================================================================
 * Construction
 *====================================================================================================================*/

BipProblem build_bip(const Workload &workload, std::span<const IndexCandidate> candidates,
                     const std::map<std::string, TemplatePlanSet> &caches, const UpdateCostTable &ucosts,
                     const Catalog &catalog, std::span<const IndexCandidate> baseline)
{
    BipProblem bip;
    bip.candidates_.assign(candidates.begin(), candidates.end());
    std::sort(bip.candidates_.begin(), bip.candidates_.end(), [](auto &a, auto &b) { return a.id < b.id; });
    for (std::size_t i = 0; i != bip.candidates_.size(); ++i)
        bip.candidate_pos_.emplace(bip.candidates_[i].id, i);
    for (auto &t : catalog.tables())
        bip.tables_.push_back(t.name);

    std::size_t var = bip.candidates_.size();
    bip.base_z_coef_.assign(bip.candidates_.size(), 0.0);

    for (auto &stmt : workload.statements()) {
        auto &q = stmt.query;
        const QueryDescriptor &read = q.is_update() ? *q.shell : q;
        auto cache = caches.find(read.id);
        if (cache == caches.end())
            throw Error(kOrigin, "MissingTemplateCache", read.id);

        QueryBlock block;
        block.statement_id = q.id;
        block.read_id = read.id;
        block.weight = stmt.weight;
        block.is_update = q.is_update();
        block.first_var = var;

        std::vector<std::int32_t> local_to_bip;
        for (auto &id : cache->second.candidate_ids()) {
            auto it = bip.candidate_pos_.find(id);
            local_to_bip.push_back(it == bip.candidate_pos_.end() ? BipOption::kNoIndex
                                                                   : std::int32_t(it->second));
        }

        for (auto &t : cache->second.templates()) {
            BipTemplate bt;
            bt.beta = t.beta;
            bt.y_var = var++;
            for (auto &slot : t.slots) {
                BipSlot bs;
                bs.table = slot.spec.table;
                bs.first_var = var;
                if (slot.no_index)
                    bs.options.push_back({BipOption::kNoIndex, *slot.no_index});
                std::vector<BipOption> real;
                for (auto &g : slot.gamma)
                    if (local_to_bip[g.candidate] != BipOption::kNoIndex)
                        real.push_back({local_to_bip[g.candidate], g.cost});
                std::sort(real.begin(), real.end(), [](auto &a, auto &b) { return a.candidate < b.candidate; });
                bs.options.insert(bs.options.end(), real.begin(), real.end());
                var += bs.options.size();
                bt.slots.push_back(std::move(bs));
            }
            block.templates.push_back(std::move(bt));
        }
        block.end_var = var;

        if (q.is_update()) {
            for (std::size_t i = 0; i != bip.candidates_.size(); ++i) {
                auto &a = bip.candidates_[i];
                if (a.table != q.target_table)
                    continue;
                auto u = ucosts.ucost(a.id, q.id);
                if (!u)
                    throw Error(kOrigin, "MissingUpdateCost", a.id + ", " + q.id);
                block.ucost.emplace_back(i, *u);
                bip.base_z_coef_[i] += stmt.weight * *u;
            }
            block.update_constant = ucosts.base_cost(q.id);
            for (auto &b : baseline) {
                if (b.table != q.target_table)
                    continue;
                auto u = ucosts.ucost(b.id, q.id);
                if (!u)
                    throw Error(kOrigin, "MissingUpdateCost", b.id + ", " + q.id);
                block.update_constant += *u;
            }
            bip.base_constant_ += stmt.weight * block.update_constant;
        }
        bip.base_scale_.push_back(stmt.weight);
        bip.blocks_.push_back(std::move(block));
    }
    bip.variable_count_ = var;
    bip.scale_ = bip.base_scale_;
    bip.z_coef_ = bip.base_z_coef_;
    bip.constant_ = bip.base_constant_;

    for (std::size_t t = 0; t != catalog.table_count(); ++t) {
        LinConstraint row;
        for (std::size_t i = 0; i != bip.candidates_.size(); ++i)
            if (bip.candidates_[i].table_ordinal == t && bip.candidates_[i].clustered)
                row.terms.push_back({i, 1.0});
        if (row.terms.size() < 2)
            continue;
        row.cmp = Cmp::Le;
        row.rhs = 1.0;
        row.origin = OriginKind::Clustered;
        row.name = "clustered[" + catalog.table(t).name + "]";
        row.group = "clustered";
        bip.constraints_.push_back(std::move(row));
    }
    return bip;
}

/*======================================================================================================================
 * Variables
 *====================================================================================================================*/

std::optional<std::size_t> BipProblem::candidate_index(const std::string &id) const
{
    auto it = candidate_pos_.find(id);
    if (it == candidate_pos_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::size_t> BipProblem::block_of_statement(const std::string &statement_id) const
{
    for (std::size_t b = 0; b != blocks_.size(); ++b)
        if (blocks_[b].statement_id == statement_id)
            return b;
    return std::nullopt;
}

VarInfo BipProblem::decode(std::size_t var) const
{
    if (var >= variable_count_)
        throw Error(kOrigin, "UnknownVariable", std::to_string(var));
    VarInfo info{};
    if (var < candidates_.size()) {
        info.kind = VarKind::Z;
        info.candidate = var;
        return info;
    }
    auto it = std::upper_bound(blocks_.begin(), blocks_.end(), var,
                               [](std::size_t v, const QueryBlock &b) { return v < b.first_var; });
    info.block = std::size_t(it - blocks_.begin()) - 1;
    auto &block = blocks_[info.block];
    auto tt = std::upper_bound(block.templates.begin(), block.templates.end(), var,
                               [](std::size_t v, const BipTemplate &t) { return v < t.y_var; });
    info.template_index = std::size_t(tt - block.templates.begin()) - 1;
    auto &tmpl = block.templates[info.template_index];
    if (var == tmpl.y_var) {
        info.kind = VarKind::Y;
        return info;
    }
    info.kind = VarKind::X;
    for (std::size_t s = 0; s != tmpl.slots.size(); ++s) {
        auto &slot = tmpl.slots[s];
        if (var >= slot.first_var && var < slot.first_var + slot.options.size()) {
            info.slot = s;
            info.option = var - slot.first_var;
            auto c = slot.options[info.option].candidate;
            if (c != BipOption::kNoIndex)
                info.candidate = std::size_t(c);
            return info;
        }
    }
    throw Error(kOrigin, "UnknownVariable", std::to_string(var));
}

std::string BipProblem::variable_name(std::size_t var) const
{
    auto info = decode(var);
    if (info.kind == VarKind::Z)
        return "z_" + candidates_[info.candidate].id;
    auto &block = blocks_[info.block];
    auto base = block.statement_id + "_" + std::to_string(info.template_index);
    if (info.kind == VarKind::Y)
        return "y_" + base;
    auto &slot = block.templates[info.template_index].slots[info.slot];
    auto c = slot.options[info.option].candidate;
    return "x_" + base + "_" + std::to_string(slot.table) + "_" +
           (c == BipOption::kNoIndex ? std::string("none") : candidates_[std::size_t(c)].id);
}

double BipProblem::objective_coefficient(std::size_t var) const
{
    auto info = decode(var);
    switch (info.kind) {
        case VarKind::Z: return z_coef_[info.candidate];
        case VarKind::Y: return scale_[info.block] * blocks_[info.block].templates[info.template_index].beta;
        case VarKind::X:
            return scale_[info.block] *
                   blocks_[info.block].templates[info.template_index].slots[info.slot].options[info.option].gamma;
    }
    return 0.0;
}

/*======================================================================================================================
 * Constraints
 *====================================================================================================================*/

std::size_t BipProblem::structural_constraint_count() const
{
    std::size_t n = 0;
    for (auto &b : blocks_) {
        ++n;
        for (auto &t : b.templates)
            for (auto &s : t.slots) {
                ++n;
                for (auto &o : s.options)
                    if (o.candidate != BipOption::kNoIndex)
                        ++n;
            }
    }
    return n;
}

std::vector<LinConstraint> BipProblem::structural_constraints() const
{
    std::vector<LinConstraint> rows;
    for (auto &b : blocks_) {
        LinConstraint ysum;
        ysum.cmp = Cmp::Eq;
        ysum.rhs = 1.0;
        ysum.name = "ysum_" + b.statement_id;
        for (auto &t : b.templates)
            ysum.terms.push_back({t.y_var, 1.0});
        rows.push_back(std::move(ysum));
    }
    for (auto &b : blocks_)
        for (std::size_t k = 0; k != b.templates.size(); ++k)
            for (auto &s : b.templates[k].slots) {
                LinConstraint xsum;
                xsum.cmp = Cmp::Eq;
                xsum.name = "xsum_" + b.statement_id + "_" + std::to_string(k) + "_" + std::to_string(s.table);
                for (std::size_t o = 0; o != s.options.size(); ++o)
                    xsum.terms.push_back({s.first_var + o, 1.0});
                xsum.terms.push_back({b.templates[k].y_var, -1.0});
                rows.push_back(std::move(xsum));
            }
    for (auto &b : blocks_)
        for (auto &t : b.templates)
            for (auto &s : t.slots)
                for (std::size_t o = 0; o != s.options.size(); ++o) {
                    auto c = s.options[o].candidate;
                    if (c == BipOption::kNoIndex)
                        continue;
                    LinConstraint link;
                    link.cmp = Cmp::Le;
                    link.name = "link_" + variable_name(s.first_var + o);
                    link.terms = {{s.first_var + o, 1.0}, {std::size_t(c), -1.0}};
                    rows.push_back(std::move(link));
                }
    return rows;
}

void BipProblem::add_constraint(LinConstraint row)
{
    constraints_.push_back(std::move(row));
}

void BipProblem::remove_group(const std::string &group)
{
    std::erase_if(constraints_, [&](auto &r) { return r.group == group; });
    std::erase_if(soft_terms_, [&](auto &t) { return t.name == group; });
    std::erase_if(infeasible_, [&](auto &n) { return n == group; });
}

void BipProblem::add_soft_term(SoftTerm term)
{
    soft_terms_.push_back(std::move(term));
}

/*======================================================================================================================
 * Evaluation
 *====================================================================================================================*/

double BipProblem::block_cost(std::size_t block, const std::vector<char> &chosen) const
{
    double best = kInfiniteCost;
    for (auto &t : blocks_[block].templates) {
        double total = 0.0;
        bool ok = true;
        for (auto &s : t.slots) {
            double m = kInfiniteCost;
            for (auto &o : s.options)
                if (o.candidate == BipOption::kNoIndex || chosen[std::size_t(o.candidate)])
                    m = std::min(m, o.gamma);
            if (!std::isfinite(m)) {
                ok = false;
                break;
            }
            total += m;
        }
        if (ok)
            best = std::min(best, total + t.beta);
    }
    return best;
}

double BipProblem::block_base_cost(std::size_t block) const
{
    std::vector<char> none(candidates_.size(), 0);
    return block_cost(block, none);
}

std::vector<LinTerm> BipProblem::statement_cost_terms(std::size_t block) const
{
    std::vector<LinTerm> terms;
    auto &b = blocks_[block];
    for (auto &t : b.templates) {
        terms.push_back({t.y_var, t.beta});
        for (auto &s : t.slots)
            for (std::size_t o = 0; o != s.options.size(); ++o)
                terms.push_back({s.first_var + o, s.options[o].gamma});
    }
    for (auto &[a, u] : b.ucost)
        terms.push_back({a, u});
    return terms;
}

double BipProblem::statement_cost(std::size_t block, const std::vector<char> &chosen) const
{
    auto &b = blocks_[block];
    double total = block_cost(block, chosen);
    for (auto &[a, u] : b.ucost)
        if (chosen[a])
            total += u;
    return total + b.update_constant;
}

double BipProblem::objective_of(const std::vector<char> &chosen) const
{
    double total = 0.0;
    for (std::size_t b = 0; b != blocks_.size(); ++b)
        total += scale_[b] * block_cost(b, chosen);
    for (std::size_t a = 0; a != candidates_.size(); ++a)
        if (chosen[a])
            total += z_coef_[a];
    return total + constant_;
}

double BipProblem::workload_cost_of(const std::vector<char> &chosen) const
{
    double total = 0.0;
    for (std::size_t b = 0; b != blocks_.size(); ++b)
        total += base_scale_[b] * block_cost(b, chosen);
    for (std::size_t a = 0; a != candidates_.size(); ++a)
        if (chosen[a])
            total += base_z_coef_[a];
    return total + base_constant_;
}

double BipProblem::soft_value(std::size_t term, const std::vector<char> &chosen) const
{
    auto &t = soft_terms_.at(term);
    double total = t.constant;
    for (auto &[a, w] : t.z_terms)
        if (chosen[a])
            total += w;
    for (auto &[b, c] : t.cost_terms)
        total += c * statement_cost(b, chosen);
    return total;
}

double BipProblem::evaluate(const std::vector<std::uint8_t> &assignment) const
{
    double total = 0.0;
    for (std::size_t a = 0; a != candidates_.size(); ++a)
        if (assignment[a])
            total += z_coef_[a];
    for (std::size_t bi = 0; bi != blocks_.size(); ++bi) {
        auto &b = blocks_[bi];
        for (auto &t : b.templates) {
            if (assignment[t.y_var])
                total += scale_[bi] * t.beta;
            for (auto &s : t.slots)
                for (std::size_t o = 0; o != s.options.size(); ++o)
                    if (assignment[s.first_var + o])
                        total += scale_[bi] * s.options[o].gamma;
        }
    }
    return total + constant_;
}

bool BipProblem::row_holds(const LinConstraint &row, const std::vector<std::uint8_t> &assignment,
                           double tolerance) const
{
    double lhs = 0.0;
    for (auto &t : row.terms)
        if (assignment[t.var])
            lhs += t.coef;
    switch (row.cmp) {
        case Cmp::Le: return lhs <= row.rhs + tolerance;
        case Cmp::Ge: return lhs >= row.rhs - tolerance;
        case Cmp::Eq: return std::abs(lhs - row.rhs) <= tolerance;
    }
    return false;
}

bool BipProblem::satisfies(const std::vector<std::uint8_t> &assignment, double tolerance) const
{
    if (assignment.size() != variable_count_)
        return false;
    for (auto v : assignment)
        if (v > 1)
            return false;
    for (auto &b : blocks_) {
        int ysum = 0;
        for (auto &t : b.templates) {
            int y = assignment[t.y_var];
            ysum += y;
            for (auto &s : t.slots) {
                int xsum = 0;
                for (std::size_t o = 0; o != s.options.size(); ++o) {
                    int x = assignment[s.first_var + o];
                    xsum += x;
                    auto c = s.options[o].candidate;
                    if (c != BipOption::kNoIndex && x > assignment[std::size_t(c)])
                        return false;
                }
                if (xsum != y)
                    return false;
            }
        }
        if (ysum != 1)
            return false;
    }
    for (auto &row : constraints_)
        if (!row_holds(row, assignment, tolerance))
            return false;
    return true;
}

void BipProblem::dump_lp(std::ostream &os) const
{
    auto write_terms = [&](const std::vector<LinTerm> &terms) {
        for (auto &t : terms)
            os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " " << variable_name(t.var);
    };
    os.precision(17);
    os << "\\ objective constant " << constant_ << "\n";
    os << "minimize\n obj:";
    for (std::size_t v = 0; v != variable_count_; ++v) {
        double c = objective_coefficient(v);
        if (c != 0.0)
            os << (c < 0 ? " - " : " + ") << std::abs(c) << " " << variable_name(v);
    }
    os << "\nsubject to\n";
    for (auto &row : structural_constraints()) {
        os << " " << row.name << ":";
        write_terms(row.terms);
        os << " " << to_string(row.cmp) << " " << row.rhs << "\n";
    }
    for (auto &row : constraints_) {
        os << " " << row.name << ":";
        write_terms(row.terms);
        os << " " << to_string(row.cmp) << " " << row.rhs << "\n";
    }
    os << "binary\n";
    for (std::size_t v = 0; v != variable_count_; ++v)
        os << " " << variable_name(v) << "\n";
    os << "end\n";
}

/*======================================================================================================================
 * Scalarization
 *====================================================================================================================*/

BipProblem BipProblem::scalarized(std::span<const double> lambda) const
{
    if (lambda.size() != soft_terms_.size() + 1)
        throw Error(kOrigin, "WeightOutOfRange",
                    "expected " + std::to_string(soft_terms_.size() + 1) + " weights, got " +
                        std::to_string(lambda.size()));
    double sum = 0.0;
    for (double l : lambda) {
        if (!(l >= 0.0 && l <= 1.0))
            throw Error(kOrigin, "WeightOutOfRange", "weight " + std::to_string(l) + " outside [0,1]");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error(kOrigin, "WeightOutOfRange", "weights sum to " + std::to_string(sum));

    BipProblem out = *this;
    out.lambda_.assign(lambda.begin(), lambda.end());
    for (std::size_t b = 0; b != blocks_.size(); ++b)
        out.scale_[b] = lambda[0] * base_scale_[b];
    for (std::size_t a = 0; a != candidates_.size(); ++a)
        out.z_coef_[a] = lambda[0] * base_z_coef_[a];
    out.constant_ = lambda[0] * base_constant_;
    for (std::size_t j = 0; j != soft_terms_.size(); ++j) {
        double l = lambda[j + 1];
        auto &t = soft_terms_[j];
        for (auto &[a, w] : t.z_terms)
            out.z_coef_[a] += l * w;
        out.constant_ += l * t.constant;
        for (auto &[b, c] : t.cost_terms) {
            out.scale_[b] += l * c;
            for (auto &[a, u] : blocks_[b].ucost)
                out.z_coef_[a] += l * c * u;
            out.constant_ += l * c * blocks_[b].update_constant;
        }
    }
    return out;
}

BipProblem scalarize(const BipProblem &bip, std::span<const double> lambda)
{
    return bip.scalarized(lambda);
}

}
