#pragma once

// Umbrella header: the full simulator and analysis toolkit.

#include "washboard/config.hpp"
#include "washboard/experiments.hpp"
#include "washboard/fft.hpp"
#include "washboard/grid.hpp"
#include "washboard/io.hpp"
#include "washboard/lattice.hpp"
#include "washboard/measure.hpp"
#include "washboard/models.hpp"
#include "washboard/parallel.hpp"
#include "washboard/propagate.hpp"
#include "washboard/stationary.hpp"
#include "washboard/version.hpp"
