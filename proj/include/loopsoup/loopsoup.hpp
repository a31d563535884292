#pragma once

#include "connection.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "group.hpp"
#include "interactions.hpp"
#include "io.hpp"
#include "loop.hpp"
#include "nu_phi.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "stats.hpp"
