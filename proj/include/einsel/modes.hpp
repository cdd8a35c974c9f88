#pragma once

#include "einsel/modes/dynamics.hpp"
#include "einsel/modes/ein_scan.hpp"
#include "einsel/modes/oscillators.hpp"
#include "einsel/modes/propagator.hpp"
