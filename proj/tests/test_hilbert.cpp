#include <catch2/catch_amalgamated.hpp>
#include "slq/core.hpp"
