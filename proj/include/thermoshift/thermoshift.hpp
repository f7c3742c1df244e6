#pragma once

#include "thermoshift/cocycle.hpp"
#include "thermoshift/conditions.hpp"
#include "thermoshift/errors.hpp"
#include "thermoshift/factor.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/logmath.hpp"
#include "thermoshift/parallel.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/shift_space.hpp"
#include "thermoshift/weight_system.hpp"
#include "thermoshift/word.hpp"
