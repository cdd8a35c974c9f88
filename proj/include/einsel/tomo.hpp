#pragma once

#include "einsel/tomo/bridge.hpp"
#include "einsel/tomo/entanglement.hpp"
#include "einsel/tomo/reconstruct.hpp"
#include "einsel/tomo/scheme.hpp"
