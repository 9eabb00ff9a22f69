#pragma once

#include "conenet/activations.hpp"
#include "conenet/data.hpp"
#include "conenet/error.hpp"
#include "conenet/experiments.hpp"
#include "conenet/geometry.hpp"
#include "conenet/network.hpp"
#include "conenet/optim.hpp"
#include "conenet/report.hpp"
#include "conenet/rng.hpp"
#include "conenet/stats.hpp"
#include "conenet/tensor.hpp"
