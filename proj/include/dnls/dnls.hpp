#pragma once

#include "dnls/grid.hpp"
#include "dnls/ground_state.hpp"
#include "dnls/linops.hpp"
#include "dnls/series.hpp"
#include "dnls/profile.hpp"
#include "dnls/blowup_law.hpp"
#include "dnls/pde.hpp"
#include "dnls/modulation.hpp"
#include "dnls/io.hpp"
