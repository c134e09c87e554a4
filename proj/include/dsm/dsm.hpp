#pragma once

// Umbrella header for the dynamical-systems-method solver library.

#include "dsm/certificates.hpp"
#include "dsm/dopri5.hpp"
#include "dsm/homotopy.hpp"
#include "dsm/io.hpp"
#include "dsm/newton_flow.hpp"
#include "dsm/problem.hpp"
#include "dsm/problem_suite.hpp"
#include "dsm/types.hpp"
#include "dsm/version.hpp"
