#pragma once

// Umbrella header.

#include "curveq/band.hpp"
#include "curveq/cli.hpp"
#include "curveq/csv.hpp"
#include "curveq/data.hpp"
#include "curveq/error.hpp"
#include "curveq/fit.hpp"
#include "curveq/linalg.hpp"
#include "curveq/med.hpp"
#include "curveq/models.hpp"
#include "curveq/report.hpp"
#include "curveq/rng.hpp"
#include "curveq/simulation.hpp"
#include "curveq/stats.hpp"
