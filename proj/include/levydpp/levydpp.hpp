#pragma once

// Umbrella header for the full library.

#include "levydpp/checks.hpp"
#include "levydpp/common.hpp"
#include "levydpp/config.hpp"
#include "levydpp/control.hpp"
#include "levydpp/dp_oracle.hpp"
#include "levydpp/dynamics.hpp"
#include "levydpp/levy_measure.hpp"
#include "levydpp/noise.hpp"
#include "levydpp/problems.hpp"
#include "levydpp/quadrature.hpp"
#include "levydpp/reports.hpp"
#include "levydpp/rng.hpp"
#include "levydpp/runner.hpp"
#include "levydpp/stats.hpp"
#include "levydpp/value.hpp"
