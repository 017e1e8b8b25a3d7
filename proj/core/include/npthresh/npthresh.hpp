#pragma once

#include "npthresh/csv.hpp"
#include "npthresh/estimators.hpp"
#include "npthresh/inference.hpp"
#include "npthresh/kernel.hpp"
#include "npthresh/montecarlo.hpp"
#include "npthresh/normal.hpp"
#include "npthresh/parallel.hpp"
#include "npthresh/rng.hpp"
#include "npthresh/search.hpp"
#include "npthresh/types.hpp"
#include "npthresh/version.hpp"
