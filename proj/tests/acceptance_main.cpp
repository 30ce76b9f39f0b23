#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "penaflow/acceptance.hpp"

// usage: acceptance [ids...] [--cache dir]; no ids runs all criteria
int main(int argc, char** argv)
{
    std::vector<int> ids;
    std::optional<std::filesystem::path> cache;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cache" && i + 1 < argc) {
            cache = argv[++i];
            continue;
        }
        const int id = std::atoi(a.c_str());
        if (id < 1 || id > penaflow::kCriterionCount) {
            std::fprintf(stderr, "unknown criterion '%s'\n", a.c_str());
            return 2;
        }
        ids.push_back(id);
    }
    if (ids.empty())
        for (int i = 1; i <= penaflow::kCriterionCount; ++i) ids.push_back(i);

    penaflow::AcceptanceSuite suite({}, cache);
    int failed = 0;
    for (int id : ids) {
        const auto r = suite.run(id);
        std::printf("%s\n", r.line().c_str());
        std::fflush(stdout);
        failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
