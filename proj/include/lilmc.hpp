#pragma once

#include "lilmc/audit.hpp"
#include "lilmc/config.hpp"
#include "lilmc/contraction.hpp"
#include "lilmc/corrector.hpp"
#include "lilmc/error.hpp"
#include "lilmc/experiment.hpp"
#include "lilmc/json_io.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/martingale.hpp"
#include "lilmc/observable.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/path.hpp"
#include "lilmc/random.hpp"
#include "lilmc/state_space.hpp"
#include "lilmc/stationary.hpp"
#include "lilmc/strassen.hpp"
#include "lilmc/taut_string.hpp"
#include "lilmc/trajectory.hpp"
#include "lilmc/transport.hpp"
#include "lilmc/variance.hpp"
