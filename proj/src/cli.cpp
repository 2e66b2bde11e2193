#include <ixt/cli.hpp>

#include <ixt/advisor.hpp>
#include <ixt/pareto.hpp>
#include <ixt/selfcheck.hpp>
#include <ixt/service.hpp>
#include <ixt/synth.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ixt {

namespace {

constexpr const char *kOrigin = "cli";

using Clock = std::chrono::steady_clock;

struct ProblemArgs
{
    std::string catalog;
    std::string workload;
    std::string constraints;
    std::string dba_candidates;
    double gap = 0.05;
    std::optional<double> time_limit;
    unsigned threads = 1;
    std::string progress_log;
    std::string dump_bip;
    std::string dump_templates;
    std::string out;
};

struct ParetoArgs
{
    double epsilon = 0.02;
    std::size_t max_points = 16;
    std::string svg;
};

struct CheckArgs
{
    std::size_t seeds = 200;
    std::uint64_t first_seed = 1;
    unsigned threads = 1;
};

struct BenchArgs
{
    std::vector<std::size_t> statements{1000};
    std::size_t tables = 8;
    std::uint64_t seed = 1;
    std::vector<double> budgets;
    double gap = 0.05;
    std::optional<double> time_limit;
    unsigned threads = 1;
    std::string out;
};

struct ServeArgs
{
    std::string listen = "127.0.0.1:7911";
    std::string ui_dir;
    std::string state_dir;
};

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(kOrigin, "FileNotFound", "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Writes `text` to `path`, or to `fallback` when the path is empty.
void emit(const std::string &path, const std::string &text, std::ostream &fallback)
{
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(kOrigin, "FileNotWritable", "cannot write " + path);
    out << text;
}

void add_problem_options(CLI::App &cmd, ProblemArgs &a)
{
    cmd.add_option("--catalog", a.catalog, "catalog statistics (JSON)")->required();
    cmd.add_option("--workload", a.workload, "workload file, one `id | weight | SQL` per line")->required();
    cmd.add_option("--constraints", a.constraints, "constraint program");
    cmd.add_option("--dba-candidates", a.dba_candidates, "extra candidate indexes (JSON list)");
    cmd.add_option("--gap", a.gap, "relative optimality gap at which to stop")->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--time-limit", a.time_limit, "seconds")->check(CLI::PositiveNumber);
    cmd.add_option("--threads", a.threads, "solver threads")->check(CLI::Range(1u, 256u));
    cmd.add_option("--progress-log", a.progress_log, "CSV of solver progress events");
    cmd.add_option("--dump-bip", a.dump_bip, "write the BIP in LP text form");
    cmd.add_option("--dump-templates", a.dump_templates, "write the template plan caches as JSON");
    cmd.add_option("--out", a.out, "output file instead of stdout");
}

std::unique_ptr<Session> load_session(const ProblemArgs &a)
{
    SessionInput input;
    try {
        input.catalog = nlohmann::json::parse(read_file(a.catalog));
    } catch (const nlohmann::json::exception &e) {
        throw Error("catalog", "InvalidJson", e.what());
    }
    input.workload = read_file(a.workload);
    if (!a.constraints.empty())
        input.constraints = read_file(a.constraints);
    if (!a.dba_candidates.empty()) {
        try {
            input.dba_candidates = nlohmann::json::parse(read_file(a.dba_candidates));
        } catch (const nlohmann::json::exception &e) {
            throw Error("candgen", "InvalidDbaCandidate", e.what());
        }
    }
    input.id = "cli";
    auto session = create_session(input);

    if (!a.dump_bip.empty()) {
        std::ostringstream lp;
        session->bip().dump_lp(lp);
        emit(a.dump_bip, lp.str(), std::cout);
    }
    if (!a.dump_templates.empty()) {
        auto doc = nlohmann::json::array();
        for (auto &[id, cache] : session->templates()) {
            (void)id;
            doc.push_back(cache.to_json(session->catalog()));
        }
        emit(a.dump_templates, doc.dump(2) + "\n", std::cout);
    }
    return session;
}

SolverOptions solver_options(const ProblemArgs &a)
{
    SolverOptions opts;
    opts.gap_threshold = a.gap;
    opts.time_limit = a.time_limit;
    opts.threads = a.threads;
    return opts;
}

std::string progress_csv(const std::vector<ProgressEvent> &events)
{
    std::ostringstream csv;
    csv << std::setprecision(17) << "elapsed_ms,incumbent,lower_bound,gap,nodes_explored\n";
    for (auto &e : events)
        csv << e.elapsed_ms << ',' << e.incumbent << ',' << e.lower_bound << ',' << e.gap << ',' << e.nodes_explored
            << '\n';
    return csv.str();
}

int infeasible(const InfeasibleProblem &e, const std::string &path, std::ostream &out, std::ostream &err)
{
    auto body = error_body(e);
    body["conflicting_constraints"] = e.conflicting();
    emit(path, body.dump(2) + "\n", out);
    err << e.what() << "\n";
    return kExitInfeasible;
}

int run_solve(const ProblemArgs &a, std::ostream &out, std::ostream &err)
{
    auto session = load_session(a);
    auto opts = solver_options(a);
    std::vector<ProgressEvent> events;
    opts.progress = [&](const ProgressEvent &e) { events.push_back(e); };
    try {
        auto rec = recommend(*session, opts);
        if (!a.progress_log.empty())
            emit(a.progress_log, progress_csv(events), out);
        emit(a.out, to_json(rec).dump(2) + "\n", out);
        return kExitOk;
    } catch (const InfeasibleProblem &e) {
        if (!a.progress_log.empty())
            emit(a.progress_log, progress_csv(events), out);
        return infeasible(e, a.out, out, err);
    }
}

int run_pareto(const ProblemArgs &a, const ParetoArgs &p, std::ostream &out, std::ostream &err)
{
    auto session = load_session(a);
    ChordOptions opts;
    opts.epsilon = p.epsilon;
    opts.max_points = p.max_points;
    opts.solver = solver_options(a);
    opts.solver.gap_threshold = a.gap;
    try {
        auto points = chord(*session, opts);
        if (!p.svg.empty()) {
            std::string y = session->bip().soft_terms().empty() ? "soft violation" : session->bip().soft_terms()[0].name;
            emit(p.svg, pareto_svg(points, "workload cost", y), out);
        }
        emit(a.out, to_json(points).dump(2) + "\n", out);
        return kExitOk;
    } catch (const InfeasibleProblem &e) {
        return infeasible(e, a.out, out, err);
    }
}

int run_oracle_check(const CheckArgs &c, std::ostream &out)
{
    SelfCheckOptions opts;
    opts.seeds = c.seeds;
    opts.first_seed = c.first_seed;
    opts.threads = c.threads;
    auto start = Clock::now();
    auto rows = run_self_check(opts);
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    bool ok = true;
    out << std::left << std::setw(12) << "check" << std::right << std::setw(10) << "instances" << std::setw(8)
        << "passed" << std::setw(8) << "failed" << "  result\n";
    for (auto &row : rows) {
        ok = ok && row.ok();
        out << std::left << std::setw(12) << row.name << std::right << std::setw(10) << row.instances << std::setw(8)
            << row.passed << std::setw(8) << row.failed << "  " << (row.ok() ? "PASS" : "FAIL") << "\n";
    }
    for (auto &row : rows)
        for (auto &f : row.failures)
            out << row.name << ": " << f << "\n";
    out << "seeds " << c.first_seed << ".." << c.first_seed + c.seeds - 1 << " in " << std::fixed
        << std::setprecision(1) << seconds << " s\n";
    return ok ? kExitOk : kExitError;
}

int run_bench(const BenchArgs &b, std::ostream &out, std::ostream &err)
{
    std::ostringstream csv;
    csv << "instance,|W|,|S|,build_ms,solve_ms,objective,gap,inum_ms,bip_ms\n";
    std::vector<std::optional<double>> budgets;
    if (b.budgets.empty())
        budgets.push_back(std::nullopt);
    for (auto f : b.budgets)
        budgets.push_back(f);

    for (auto n : b.statements) {
        BenchOptions bo;
        bo.statements = n;
        bo.tables = b.tables;
        bo.seed = b.seed;
        auto inst = bench_instance(bo);
        double total_size = 0;
        for (auto &c : inst.candidates)
            total_size += c.size_bytes;
        for (auto budget : budgets) {
            std::ostringstream name;
            name << "w" << n << "-t" << b.tables << "-s" << b.seed;
            SessionInput input;
            input.catalog = to_json(inst.catalog);
            input.workload = inst.workload_text;
            if (budget) {
                name << "-b" << *budget;
                input.constraints = "ASSERT SUM(SIZE) <= " + std::to_string(std::int64_t(total_size * *budget)) + "\n";
            }
            auto start = Clock::now();
            auto session = create_session(input);
            double build_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
            SolverOptions opts;
            opts.gap_threshold = b.gap;
            opts.time_limit = b.time_limit;
            opts.threads = b.threads;
            auto stats = session->stats();
            csv << std::setprecision(10) << name.str() << ',' << session->workload().size() << ','
                << session->candidates().size() << ',' << build_ms << ',';
            try {
                auto rec = recommend(*session, opts);
                csv << rec.solve_ms << ',' << rec.objective << ',' << rec.gap;
            } catch (const InfeasibleProblem &e) {
                err << name.str() << ": " << e.what() << "\n";
                csv << ",,";
            }
            csv << ',' << stats.inum_ms << ',' << stats.bip_ms << '\n';
        }
    }
    emit(b.out, csv.str(), out);
    return kExitOk;
}

int run_serve(const ServeArgs &s, std::ostream &out)
{
    ServiceOptions opts;
    auto [host, port] = parse_listen(s.listen);
    opts.host = host;
    opts.port = port;
    if (!s.ui_dir.empty())
        opts.ui_dir = s.ui_dir;
    if (!s.state_dir.empty())
        opts.state_dir = s.state_dir;
    Service service(opts);
    int bound = service.bind();
    out << "listening on http://" << host << ":" << bound << std::endl;
    service.listen();
    return kExitOk;
}

}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Interactive index tuning: recommendations, Pareto exploration, checks and a tuning service"};
    app.name("advisor");
    app.require_subcommand(1);

    ProblemArgs solve_args;
    auto *solve = app.add_subcommand("solve", "recommend indexes for a workload");
    add_problem_options(*solve, solve_args);

    ProblemArgs pareto_args;
    pareto_args.gap = 0.0;
    ParetoArgs pareto_extra;
    auto *pareto = app.add_subcommand("pareto", "trade workload cost against soft constraints");
    add_problem_options(*pareto, pareto_args);
    pareto->add_option("--epsilon", pareto_extra.epsilon, "refinement threshold")->check(CLI::PositiveNumber);
    pareto->add_option("--max-points", pareto_extra.max_points, "upper limit on returned points")
        ->check(CLI::Range(std::size_t(2), std::size_t(1000)));
    pareto->add_option("--svg", pareto_extra.svg, "write a scatter plot of the first two objectives");

    CheckArgs check_args;
    auto *check = app.add_subcommand("oracle-check", "cross-check the solver against exhaustive enumeration");
    check->add_option("--seeds", check_args.seeds, "number of random instances")->check(CLI::PositiveNumber);
    check->add_option("--first-seed", check_args.first_seed, "seed of the first instance");
    check->add_option("--threads", check_args.threads, "solver threads")->check(CLI::Range(1u, 256u));

    BenchArgs bench_args;
    auto *bench = app.add_subcommand("bench", "time synthetic instances and print CSV");
    bench->add_option("--statements", bench_args.statements, "workload sizes")->delimiter(',');
    bench->add_option("--tables", bench_args.tables, "tables in the synthetic schema")->check(CLI::PositiveNumber);
    bench->add_option("--seeds,--seed", bench_args.seed, "generator seed");
    bench->add_option("--budget", bench_args.budgets, "storage budgets as fractions of the total candidate size")
        ->delimiter(',');
    bench->add_option("--gap", bench_args.gap, "relative optimality gap")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--time-limit", bench_args.time_limit, "seconds per solve")->check(CLI::PositiveNumber);
    bench->add_option("--threads", bench_args.threads, "solver threads")->check(CLI::Range(1u, 256u));
    bench->add_option("--out", bench_args.out, "CSV file instead of stdout");

    ServeArgs serve_args;
    auto *serve = app.add_subcommand("serve", "run the HTTP tuning service");
    serve->add_option("--listen", serve_args.listen, "host:port");
    serve->add_option("--ui-dir", serve_args.ui_dir, "directory with the web console assets");
    serve->add_option("--state-dir", serve_args.state_dir, "snapshot directory (default $ADVISOR_STATE_DIR)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*solve)
            return run_solve(solve_args, out, err);
        if (*pareto)
            return run_pareto(pareto_args, pareto_extra, out, err);
        if (*check)
            return run_oracle_check(check_args, out);
        if (*bench)
            return run_bench(bench_args, out, err);
        if (*serve)
            return run_serve(serve_args, out);
    } catch (const InfeasibleProblem &e) {
        return infeasible(e, "", out, err);
    } catch (const Error &e) {
        err << e.what() << "\n";
        return kExitError;
    } catch (const std::exception &e) {
        err << "advisor: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

int run_cli(int argc, char **argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}
