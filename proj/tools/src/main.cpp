#include <iostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "commands.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
    // Training frees and reallocates tens of MB of graph buffers per step;
    // keep them on the heap instead of returning them to the OS each time.
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    return mrf::cli::run(argc, argv, std::cout, std::cerr);
}
