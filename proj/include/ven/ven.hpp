#pragma once

#include "ven/core.hpp"
#include "ven/energy.hpp"
#include "ven/harness.hpp"
#include "ven/heuristic.hpp"
#include "ven/lp.hpp"
#include "ven/network.hpp"
#include "ven/path_enum.hpp"
#include "ven/random.hpp"
#include "ven/rate_opt.hpp"
#include "ven/scenario.hpp"
