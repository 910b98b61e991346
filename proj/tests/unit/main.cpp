#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "vesselfuse/parallel.hpp"

int main(int argc, char** argv) {
    vfuse::set_log_level(vfuse::LogLevel::error);
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
