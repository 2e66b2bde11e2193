#include <ixt/pareto.hpp>

#include <ixt/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

namespace ixt {

namespace {

constexpr const char *kOrigin = "pareto";

class ChordRun
{
public:
    ChordRun(const BipProblem &bip, const ChordOptions &options)
        : bip_(bip), opts_(options), m_(bip.soft_terms().size() + 1)
    { }

    std::vector<ParetoPoint> run()
    {
        auto scale = magnitudes();
        for (std::size_t j = 0; j != m_; ++j)
            add_point(extreme(j, scale));
        if (points_.size() < 2)
            return finish();

        lo_.assign(m_, 0.0);
        range_.assign(m_, 1.0);
        for (std::size_t i = 0; i != m_; ++i) {
            double lo = points_[0].objectives[i], hi = lo;
            for (auto &p : points_) {
                lo = std::min(lo, p.objectives[i]);
                hi = std::max(hi, p.objectives[i]);
            }
            lo_[i] = lo;
            range_[i] = hi - lo > 0 ? hi - lo : 1.0;
        }

        std::deque<std::vector<std::size_t>> facets;
        if (points_.size() == m_) {
            std::vector<std::size_t> all(m_);
            for (std::size_t i = 0; i != m_; ++i)
                all[i] = i;
            facets.push_back(all);
        } else if (m_ == 2) {
            facets.push_back({0, 1});
        }
        while (!facets.empty() && points_.size() < opts_.max_points) {
            auto facet = facets.front();
            facets.pop_front();
            auto normal = facet_normal(facet);
            if (!normal)
                continue;
            std::vector<double> lambda(m_);
            double sum = 0;
            for (std::size_t i = 0; i != m_; ++i) {
                lambda[i] = std::max((*normal)[i], 0.0) / range_[i];
                sum += lambda[i];
            }
            if (!(sum > 0))
                continue;
            bool clamped = false;
            for (auto &l : lambda) {
                clamped = clamped || l / sum < opts_.eta;
                l = std::max(l / sum, opts_.eta);
            }
            double renorm = 0;
            for (auto l : lambda)
                renorm += l;
            for (auto &l : lambda)
                l /= renorm;

            // Every facet corner has the same weighted value.  A point at
            // distance d from the facet is d / (sum * renorm) below it.
            std::size_t anchor = facet[0];
            for (auto k : facet)
                if (weighted(points_[k], lambda) < weighted(points_[anchor], lambda))
                    anchor = k;
            std::optional<double> cutoff;
            if (opts_.warm_start && !clamped)
                cutoff = weighted(points_[anchor], lambda) - 0.5 * opts_.epsilon / (sum * renorm);

            std::size_t source = facet[0];
            for (auto k : facet)
                if (lambda_distance(points_[k], lambda) < lambda_distance(points_[source], lambda))
                    source = k;

            auto candidate = solve_at(lambda, cutoff, &points_[anchor], &states_[source]);
            if (!candidate || known(*candidate))
                continue;
            double distance = 0;
            double norm = 0;
            for (std::size_t i = 0; i != m_; ++i) {
                double a = scaled(points_[facet[0]].objectives[i], i);
                double c = scaled(candidate->objectives[i], i);
                distance += (*normal)[i] * (a - c);
                norm += (*normal)[i] * (*normal)[i];
            }
            distance /= std::sqrt(norm);
            if (distance < opts_.epsilon)
                continue;
            auto index = points_.size();
            add_point(std::move(*candidate));
            for (std::size_t k = 0; k != facet.size(); ++k) {
                auto child = facet;
                child[k] = index;
                facets.push_back(child);
            }
        }
        return finish();
    }

private:
    double scaled(double v, std::size_t i) const { return (v - lo_[i]) / range_[i]; }

    /// Rough size of each objective: the larger of its values at X = ∅ and X = S.
    std::vector<double> magnitudes() const
    {
        std::vector<char> none(bip_.candidates().size(), 0), all(bip_.candidates().size(), 1);
        std::vector<double> out(m_);
        out[0] = std::max({1.0, std::abs(bip_.workload_cost_of(none)), std::abs(bip_.workload_cost_of(all))});
        for (std::size_t t = 0; t + 1 < m_; ++t)
            out[t + 1] = std::max({1.0, std::abs(bip_.soft_value(t, none)), std::abs(bip_.soft_value(t, all))});
        for (auto &v : out)
            if (!std::isfinite(v))
                v = 1.0;
        return out;
    }

    /// Unit normal of the facet in normalized objective space, oriented towards the origin.
    std::optional<std::vector<double>> facet_normal(const std::vector<std::size_t> &facet) const
    {
        Eigen::MatrixXd diff(Eigen::Index(facet.size() - 1), Eigen::Index(m_));
        for (std::size_t r = 1; r != facet.size(); ++r)
            for (std::size_t i = 0; i != m_; ++i)
                diff(Eigen::Index(r - 1), Eigen::Index(i)) =
                    scaled(points_[facet[r]].objectives[i], i) - scaled(points_[facet[0]].objectives[i], i);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(diff);
        Eigen::MatrixXd kernel = lu.kernel();
        if (kernel.cols() != 1 || kernel.norm() == 0.0)
            return std::nullopt;
        Eigen::VectorXd n = kernel.col(0).normalized();
        if (n.sum() < 0)
            n = -n;
        return std::vector<double>(n.data(), n.data() + n.size());
    }

    static double weighted(const ParetoPoint &p, const std::vector<double> &lambda)
    {
        double v = 0;
        for (std::size_t i = 0; i != lambda.size(); ++i)
            v += lambda[i] * p.objectives[i];
        return v;
    }

    /// Lexicographic minimum of objective j: its optimum first, then ties
    /// broken by a small weight on the other objectives.  The weight shrinks
    /// until the tie-break keeps objective j at its optimum.
    ParetoPoint extreme(std::size_t j, const std::vector<double> &scale)
    {
        std::vector<double> unit(m_, 0.0);
        unit[j] = 1.0;
        auto pure = *solve_at(unit);
        auto pure_state = last_state_;
        double best = pure.objectives[j];
        double tol = 1e-9 * std::max(1.0, std::abs(best));
        for (double eta = opts_.eta; eta >= opts_.eta * 1e-6; eta *= 1e-3) {
            std::vector<double> lambda(m_);
            for (std::size_t i = 0; i != m_; ++i)
                lambda[i] = i == j ? 1.0 : eta * scale[j] / scale[i];
            double sum = 0;
            for (auto l : lambda)
                sum += l;
            for (auto &l : lambda)
                l /= sum;
            auto tie_break = *solve_at(lambda, std::nullopt, &pure, &pure_state);
            if (tie_break.objectives[j] <= best + tol)
                return tie_break;
        }
        last_state_ = std::move(pure_state);
        return pure;
    }

    static double lambda_distance(const ParetoPoint &p, const std::vector<double> &lambda)
    {
        double d = 0;
        for (std::size_t i = 0; i != lambda.size(); ++i)
            d += std::abs(p.lambda[i] - lambda[i]);
        return d;
    }

    /// Solves the scalarized problem, warm-started from `from` when given.
    /// Empty when a cutoff is given and no configuration beats it.  The
    /// solver state it ends in is left in last_state_.
    std::optional<ParetoPoint> solve_at(const std::vector<double> &lambda, std::optional<double> cutoff = {},
                                        const ParetoPoint *incumbent = nullptr, const SolverState *from = nullptr)
    {
        auto problem = bip_.scalarized(lambda);
        auto options = opts_.solver;
        Solution sol;
        last_state_ = SolverState{};
        if (opts_.warm_start && from && from->valid) {
            options.cutoff = cutoff;
            last_state_ = *from;
            if (incumbent)
                last_state_.incumbent_ids = incumbent->indexes;
            sol = resolve_delta(last_state_, problem, options);
        } else {
            sol = solve(problem, options, opts_.warm_start ? &last_state_ : nullptr);
        }
        if (sol.status == SolveStatus::Infeasible)
            throw InfeasibleProblem(sol.conflicting_constraints);
        if (sol.cutoff_reached)
            return std::nullopt;
        std::vector<char> chosen(bip_.candidates().size(), 0);
        for (auto a : sol.chosen)
            chosen[a] = 1;
        ParetoPoint p;
        p.lambda = lambda;
        p.objectives.push_back(bip_.workload_cost_of(chosen));
        for (std::size_t t = 0; t != bip_.soft_terms().size(); ++t)
            p.objectives.push_back(bip_.soft_value(t, chosen));
        p.indexes = sol.chosen_ids;
        p.solve_ms = sol.elapsed_ms;
        p.status = sol.status;
        p.nodes_explored = sol.nodes_explored;
        return p;
    }

    bool known(const ParetoPoint &p) const
    {
        return std::any_of(points_.begin(), points_.end(), [&](auto &q) { return q.indexes == p.indexes; });
    }

    void add_point(ParetoPoint p)
    {
        if (known(p))
            return;
        points_.push_back(std::move(p));
        states_.push_back(std::move(last_state_));
    }

    std::vector<ParetoPoint> finish()
    {
        auto out = points_;
        std::sort(out.begin(), out.end(), [](auto &a, auto &b) { return a.objectives < b.objectives; });
        return out;
    }

    const BipProblem &bip_;
    const ChordOptions &opts_;
    std::size_t m_;
    SolverState last_state_;
    std::vector<ParetoPoint> points_;
    std::vector<SolverState> states_;
    std::vector<double> lo_, range_;
};

std::string fmt(double v)
{
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

}

std::vector<ParetoPoint> chord(const BipProblem &bip, const ChordOptions &options)
{
    if (bip.soft_terms().empty())
        throw Error(kOrigin, "NoSoftConstraints", "add at least one SOFT constraint");
    if (!(options.epsilon > 0))
        throw Error(kOrigin, "InvalidEpsilon", "epsilon must be positive");
    if (options.max_points < 2)
        throw Error(kOrigin, "InvalidMaxPoints", "max_points must be at least 2");
    return ChordRun(bip, options).run();
}

std::vector<ParetoPoint> chord(Session &session, const ChordOptions &options)
{
    BusyGuard guard(session);
    return chord(session.bip(), options);
}

nlohmann::json to_json(const std::vector<ParetoPoint> &points)
{
    auto out = nlohmann::json::array();
    for (auto &p : points)
        out.push_back({{"lambda", p.lambda},
                       {"objectives", p.objectives},
                       {"indexes", p.indexes},
                       {"solve_ms", p.solve_ms},
                       {"status", to_string(p.status)}});
    return out;
}

std::string pareto_svg(const std::vector<ParetoPoint> &points, const std::string &x_label, const std::string &y_label)
{
    constexpr double W = 640, H = 480, pad = 60;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!points.empty()) {
        x0 = x1 = points[0].objectives.at(0);
        y0 = y1 = points[0].objectives.size() > 1 ? points[0].objectives[1] : 0.0;
        for (auto &p : points) {
            double y = p.objectives.size() > 1 ? p.objectives[1] : 0.0;
            x0 = std::min(x0, p.objectives[0]);
            x1 = std::max(x1, p.objectives[0]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 == x0)
        x1 = x0 + 1;
    if (y1 == y0)
        y1 = y0 + 1;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    svg << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
        << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    svg << "<text x=\"" << pad << "\" y=\"" << H - pad + 18 << "\">" << fmt(x0) << "</text>\n";
    svg << "<text x=\"" << W - pad << "\" y=\"" << H - pad + 18 << "\" text-anchor=\"end\">" << fmt(x1)
        << "</text>\n";
    svg << "<text x=\"" << pad - 5 << "\" y=\"" << H - pad << "\" text-anchor=\"end\">" << fmt(y0) << "</text>\n";
    svg << "<text x=\"" << pad - 5 << "\" y=\"" << pad << "\" text-anchor=\"end\">" << fmt(y1) << "</text>\n";
    if (points.size() > 1) {
        svg << "<polyline fill=\"none\" stroke=\"#888\" points=\"";
        for (auto &p : points)
            svg << px(p.objectives[0]) << "," << py(p.objectives.size() > 1 ? p.objectives[1] : 0.0) << " ";
        svg << "\"/>\n";
    }
    for (auto &p : points) {
        svg << "<circle cx=\"" << px(p.objectives[0]) << "\" cy=\""
            << py(p.objectives.size() > 1 ? p.objectives[1] : 0.0) << "\" r=\"5\" fill=\"#1f77b4\"><title>";
        for (std::size_t i = 0; i != p.indexes.size(); ++i)
            svg << (i ? " " : "") << p.indexes[i];
        svg << "</title></circle>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}
