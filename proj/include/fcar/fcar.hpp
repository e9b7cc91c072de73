#pragma once

// Umbrella header: forecasting of functional time series by selecting the
// most predictive evaluation points of past curves, with simulators, an
// evaluation harness and exact Brownian-RKHS kernel approximation.

#include "fcar/covariance.hpp"
#include "fcar/errors.hpp"
#include "fcar/eval.hpp"
#include "fcar/forecast.hpp"
#include "fcar/grid.hpp"
#include "fcar/linalg.hpp"
#include "fcar/matrix.hpp"
#include "fcar/parallel.hpp"
#include "fcar/points.hpp"
#include "fcar/rkhs.hpp"
#include "fcar/rng.hpp"
#include "fcar/selection.hpp"
#include "fcar/series.hpp"
#include "fcar/simulate.hpp"

namespace fcar {
inline constexpr const char* kVersion = "0.1.0";
}
