#include <catch2/catch_amalgamated.hpp>

#include "ffpred/ffpred.hpp"
