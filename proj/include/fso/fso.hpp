#pragma once

#include "fso/channel.hpp"
#include "fso/core.hpp"
#include "fso/metrics.hpp"
#include "fso/monte_carlo.hpp"
#include "fso/optimizer.hpp"
#include "fso/sigchain.hpp"
