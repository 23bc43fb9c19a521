#pragma once

#include "pfgamma/bulk_density.hpp"
#include "pfgamma/diagnostics.hpp"
#include "pfgamma/energy.hpp"
#include "pfgamma/errors.hpp"
#include "pfgamma/gamma_limit.hpp"
#include "pfgamma/grid.hpp"
#include "pfgamma/operator_algebra.hpp"
#include "pfgamma/parallel.hpp"
#include "pfgamma/polynomial.hpp"
#include "pfgamma/scenario.hpp"
#include "pfgamma/solver.hpp"
#include "pfgamma/sym.hpp"
