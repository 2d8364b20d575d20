#pragma once

#include "qcollapse/errors.hpp"
#include "qcollapse/format.hpp"
#include "qcollapse/observables.hpp"
#include "qcollapse/params.hpp"
#include "qcollapse/profile.hpp"
#include "qcollapse/quadrature.hpp"
#include "qcollapse/specfun.hpp"
#include "qcollapse/svg_plot.hpp"
#include "qcollapse/tdse.hpp"
