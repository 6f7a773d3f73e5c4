#include <catch2/catch_amalgamated.hpp>
#include "bode/harness/runner.hpp"
int main(int, char**){ return 0; }
