#pragma once

/// @file skewsim.hpp
/// @brief Umbrella header.

#include "skewsim/collisions.hpp"
#include "skewsim/config_json.hpp"
#include "skewsim/core.hpp"
#include "skewsim/ensemble.hpp"
#include "skewsim/girsanov.hpp"
#include "skewsim/io.hpp"
#include "skewsim/oracles.hpp"
#include "skewsim/rng.hpp"
#include "skewsim/skew_chain.hpp"
#include "skewsim/skorohod.hpp"
#include "skewsim/suites.hpp"
