#pragma once

// Umbrella header: the full estimation and simulation stack.

#include "errcal/bootstrap.hpp"
#include "errcal/calibrate.hpp"
#include "errcal/error.hpp"
#include "errcal/generate.hpp"
#include "errcal/json_io.hpp"
#include "errcal/matrix.hpp"
#include "errcal/montecarlo.hpp"
#include "errcal/nuisance.hpp"
#include "errcal/psi.hpp"
#include "errcal/records.hpp"
#include "errcal/rng.hpp"
#include "errcal/sandwich.hpp"
#include "errcal/scenario.hpp"
#include "errcal/stats.hpp"
