// Umbrella header.
#pragma once

#include "muskat/commands.hpp"
#include "muskat/diagnostics.hpp"
#include "muskat/error.hpp"
#include "muskat/evolution.hpp"
#include "muskat/field.hpp"
#include "muskat/grid.hpp"
#include "muskat/io.hpp"
#include "muskat/kernels.hpp"
#include "muskat/layers.hpp"
#include "muskat/linear.hpp"
#include "muskat/nonlocal.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/rhs.hpp"
#include "muskat/state.hpp"
