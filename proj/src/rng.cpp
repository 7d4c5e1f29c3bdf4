#include "eate/rng.hpp"
