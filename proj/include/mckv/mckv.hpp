#pragma once

#include "mckv/besov.hpp"
#include "mckv/experiments.hpp"
#include "mckv/fokker_planck.hpp"
#include "mckv/grid.hpp"
#include "mckv/io.hpp"
#include "mckv/kernels.hpp"
#include "mckv/particles.hpp"
#include "mckv/peano.hpp"
#include "mckv/semigroup.hpp"
#include "mckv/thresholds.hpp"
