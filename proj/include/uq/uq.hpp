#pragma once

// Umbrella header.

#include "uq/config.hpp"
#include "uq/copula.hpp"
#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/gpr.hpp"
#include "uq/io.hpp"
#include "uq/joint.hpp"
#include "uq/kernels.hpp"
#include "uq/logging.hpp"
#include "uq/mcmc.hpp"
#include "uq/model.hpp"
#include "uq/pce.hpp"
#include "uq/polynomials.hpp"
#include "uq/random.hpp"
#include "uq/reliability.hpp"
#include "uq/runner.hpp"
#include "uq/sample_set.hpp"
#include "uq/sampling.hpp"
#include "uq/sensitivity.hpp"
#include "uq/strata.hpp"
#include "uq/study.hpp"
#include "uq/surrogate_io.hpp"
#include "uq/testfunctions.hpp"
#include "uq/transformations.hpp"
