#pragma once

#include "tactile/agent.hpp"
#include "tactile/experiment.hpp"
#include "tactile/gateway.hpp"
#include "tactile/geometry.hpp"
#include "tactile/guidance.hpp"
#include "tactile/raster.hpp"
#include "tactile/stats.hpp"
#include "tactile/tacton.hpp"
#include "tactile/trial.hpp"
