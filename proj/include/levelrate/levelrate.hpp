#pragma once

#include "levelrate/dataset.hpp"
#include "levelrate/errors.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/loss.hpp"
#include "levelrate/mlp.hpp"
#include "levelrate/optimizer.hpp"
#include "levelrate/param_vector.hpp"
#include "levelrate/risk.hpp"
#include "levelrate/schedule.hpp"
#include "levelrate/stability.hpp"
#include "levelrate/topology.hpp"
#include "levelrate/trajectory.hpp"
