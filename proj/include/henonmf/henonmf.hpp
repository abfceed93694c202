#pragma once

#include "errors.hpp"
#include "map_core.hpp"
#include "manifolds.hpp"
#include "symbolic.hpp"
#include "thermo.hpp"
#include "markov.hpp"
#include "levelsets.hpp"
#include "io.hpp"
#include "pipeline.hpp"
