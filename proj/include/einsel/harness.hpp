#pragma once

#include "einsel/harness/config.hpp"
#include "einsel/harness/io.hpp"
#include "einsel/harness/report.hpp"
#include "einsel/harness/run.hpp"
#include "einsel/harness/scenarios.hpp"
