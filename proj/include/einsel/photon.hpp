#pragma once

#include "einsel/photon/clickfile.hpp"
#include "einsel/photon/decay_fit.hpp"
#include "einsel/photon/estimators.hpp"
#include "einsel/photon/models.hpp"
#include "einsel/photon/simulate.hpp"
