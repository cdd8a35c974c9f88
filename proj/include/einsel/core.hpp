#pragma once

#include "einsel/core/error.hpp"
#include "einsel/core/fock.hpp"
#include "einsel/core/ops.hpp"
#include "einsel/core/random.hpp"
#include "einsel/core/types.hpp"
