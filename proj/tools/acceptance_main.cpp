#include "acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

// Prints one PASS/FAIL line per criterion; exit status 1 if any fails.
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (int i = 1; i <= anisoft::acceptance::kCriteria; ++i) ids.push_back(i);
    int failed = 0;
    for (int id : ids) {
        const auto t0 = std::chrono::steady_clock::now();
        anisoft::acceptance::CriterionResult r;
        try {
            r = anisoft::acceptance::criterion(id);
        } catch (const std::exception& e) {
            r.id = id;
            r.title = "criterion " + std::to_string(id);
            r.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s: %s (%.1fs)\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(), r.summary.c_str(), secs);
        std::fflush(stdout);
        failed += !r.passed;
    }
    return failed == 0 ? 0 : 1;
}
