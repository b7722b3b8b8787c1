#pragma once

#include "slicedist/cdf.hpp"
#include "slicedist/control_tasks.hpp"
#include "slicedist/direction.hpp"
#include "slicedist/estimator.hpp"
#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/io.hpp"
#include "slicedist/optimizers.hpp"
#include "slicedist/parallel.hpp"
#include "slicedist/rng.hpp"
#include "slicedist/rollout.hpp"
#include "slicedist/sample_set.hpp"
#include "slicedist/slice_plan.hpp"
#include "slicedist/sliced_distance.hpp"
#include "slicedist/stats_tests.hpp"
