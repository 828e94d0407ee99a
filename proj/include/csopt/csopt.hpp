#ifndef CSOPT_CSOPT_HPP
#define CSOPT_CSOPT_HPP

#include "csopt/bench.hpp"
#include "csopt/core.hpp"
#include "csopt/metrics.hpp"
#include "csopt/problems.hpp"
#include "csopt/rng.hpp"
#include "csopt/schedules.hpp"
#include "csopt/sets.hpp"
#include "csopt/solver.hpp"
#include "csopt/trace.hpp"

#endif  // CSOPT_CSOPT_HPP
