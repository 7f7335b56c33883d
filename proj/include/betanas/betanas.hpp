#pragma once

// Umbrella header: the whole library in one include.

#include "betanas/alpha.hpp"
#include "betanas/analysis.hpp"
#include "betanas/array.hpp"
#include "betanas/bench.hpp"
#include "betanas/data.hpp"
#include "betanas/grad.hpp"
#include "betanas/io.hpp"
#include "betanas/regularize.hpp"
#include "betanas/schedule.hpp"
#include "betanas/search.hpp"
#include "betanas/space.hpp"
#include "betanas/supernet.hpp"
