#include <catch2/catch_amalgamated.hpp>

#include "kz/linalg.hpp"

int main(int argc, char* argv[]) {
    kz::pin_blas_single_thread();
    return Catch::Session().run(argc, argv);
}
