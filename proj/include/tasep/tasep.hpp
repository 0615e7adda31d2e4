#pragma once

#include "airy.hpp"
#include "charlier.hpp"
#include "core/numeric.hpp"
#include "core/types.hpp"
#include "flat.hpp"
#include "fredholm.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "scaling.hpp"
#include "schuetz.hpp"
#include "simulation.hpp"
