#pragma once

#include "wavefronts/calculus.hpp"
#include "wavefronts/equation.hpp"
#include "wavefronts/errors.hpp"
#include "wavefronts/lattice.hpp"
#include "wavefronts/model.hpp"
#include "wavefronts/profile.hpp"
#include "wavefronts/regions.hpp"
#include "wavefronts/singular_ode.hpp"
#include "wavefronts/thresholds.hpp"
