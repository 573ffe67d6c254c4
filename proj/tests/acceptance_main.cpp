// Acceptance gate: runs the verification battery at full scale and
// prints one pass/fail line per criterion. Exit status is zero only if
// every criterion holds.

#include <cstdio>
#include <cstring>
#include <string>

#include "sbmom/report.hpp"

int main(int argc, char** argv) {
    sbmom::ReportOptions opt;
    opt.tmp_dir = ".";
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--cli") == 0 && i + 1 < argc) opt.cli_path = argv[++i];
        if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc)
            opt.seed = std::strtoull(argv[++i], nullptr, 10);
        if (std::strcmp(argv[i], "--quick") == 0) opt.quick = true;
        if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
            opt.threads = std::atoi(argv[++i]);
    }

    const auto results = sbmom::run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results)
        if (!r.pass) ++failed;
    if (failed == 0) {
        std::printf("acceptance: all %zu criteria passed\n", results.size());
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", failed);
    return 1;
}
