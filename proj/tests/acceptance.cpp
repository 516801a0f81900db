// One line per acceptance criterion; exit status 0 only when all nine pass.
#include "nimcav/validation.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv)
{
    const int threads = argc > 1 ? std::atoi(argv[1]) : 1;
    int failed = 0;
    nimcav::run_validation(true, threads, [&](const nimcav::CheckResult& r) {
        std::printf("%s\n", nimcav::format_check(r).c_str());
        std::fflush(stdout);
        if (!r.pass) ++failed;
    });
    std::printf("%d of 9 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
