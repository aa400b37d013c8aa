#pragma once

#include "linecover/config.hpp"
#include "linecover/density.hpp"
#include "linecover/metrics.hpp"
#include "linecover/oracle.hpp"
#include "linecover/protocol.hpp"
#include "linecover/quadrature.hpp"
#include "linecover/sim.hpp"
#include "linecover/table.hpp"
#include "linecover/verify.hpp"
