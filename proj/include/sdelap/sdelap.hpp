#pragma once

#include "sdelap/inference/fit.hpp"
#include "sdelap/inference/marginal.hpp"
#include "sdelap/inference/transition.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"
#include "sdelap/model/params.hpp"
#include "sdelap/oracles/exact.hpp"
#include "sdelap/oracles/kalman.hpp"
#include "sdelap/oracles/simulate.hpp"
