#pragma once

#include "ppswap/analysis.hpp"
#include "ppswap/config.hpp"
#include "ppswap/game.hpp"
#include "ppswap/market.hpp"
#include "ppswap/montecarlo.hpp"
#include "ppswap/report.hpp"
#include "ppswap/solver.hpp"
