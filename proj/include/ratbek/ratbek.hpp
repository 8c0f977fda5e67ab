#pragma once

#include "ratbek/backward_error.hpp"
#include "ratbek/companion.hpp"
#include "ratbek/io.hpp"
#include "ratbek/linalg.hpp"
#include "ratbek/oracle.hpp"
#include "ratbek/perturbation.hpp"
#include "ratbek/problems.hpp"
#include "ratbek/realization.hpp"
#include "ratbek/types.hpp"
