#pragma once

#include "choquard/diagnostics.hpp"
#include "choquard/fft.hpp"
#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/io.hpp"
#include "choquard/operators.hpp"
#include "choquard/regimes.hpp"
#include "choquard/solver.hpp"
#include "choquard/special.hpp"
#include "choquard/suite.hpp"
#include "choquard/verify.hpp"
