// Umbrella header.
#pragma once

#include "gapsol/error.hpp"
#include "gapsol/grid.hpp"
#include "gapsol/cell_function.hpp"
#include "gapsol/field_io.hpp"
#include "gapsol/spectral.hpp"
#include "gapsol/nonlinear.hpp"
#include "gapsol/action.hpp"
#include "gapsol/solver.hpp"
#include "gapsol/continuation.hpp"
#include "gapsol/photonic.hpp"
#include "gapsol/config.hpp"
#include "gapsol/commands.hpp"
