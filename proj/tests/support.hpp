#pragma once

#include <ixt/advisor.hpp>
#include <ixt/catalog.hpp>
#include <ixt/error.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace ixt::test {

inline std::string fixture(const std::string &name)
{
    return std::string(IXT_FIXTURES) + "/" + name;
}

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// T1(c1, c2, c3) with 10000 rows and T2(d1, d2) with 1000 rows.
inline Catalog f1()
{
    return load_catalog_text(read_file(fixture("f1_catalog.json")));
}

inline const char *kQ1 = "Q1 | 1.0 | SELECT c2 FROM T1 WHERE c1 = 5";

inline IndexCandidate a1(const Catalog &cat) { return make_candidate(cat, "T1", {"c1"}); }
inline IndexCandidate a2(const Catalog &cat) { return make_candidate(cat, "T1", {"c1"}, {"c2"}); }

inline SessionInput f1_input(const std::string &workload = kQ1, const std::string &constraints = "")
{
    SessionInput in;
    in.catalog = nlohmann::json::parse(read_file(fixture("f1_catalog.json")));
    in.workload = workload;
    in.constraints = constraints;
    return in;
}

/// Runs `body` and returns the Error code it threw, or "" when it did not throw.
template <class F>
std::string error_code(F &&body)
{
    try {
        body();
    } catch (const Error &e) {
        return e.code();
    }
    return "";
}

}
