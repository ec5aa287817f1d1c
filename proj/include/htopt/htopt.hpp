#pragma once

#include "htopt/core.hpp"
#include "htopt/rng.hpp"
#include "htopt/problems.hpp"
#include "htopt/noise.hpp"
#include "htopt/optimizers.hpp"
#include "htopt/lower_bound.hpp"
#include "htopt/theory.hpp"
#include "htopt/harness.hpp"
