#pragma once

#include "benchmarks.hpp"
#include "config.hpp"
#include "core.hpp"
#include "derivative_check.hpp"
#include "directions.hpp"
#include "linesearch.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "trustregion.hpp"
