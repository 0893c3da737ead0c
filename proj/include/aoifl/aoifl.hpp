#pragma once

#include "aoifl/aoi.hpp"
#include "aoifl/ccp.hpp"
#include "aoifl/config.hpp"
#include "aoifl/csv.hpp"
#include "aoifl/engine.hpp"
#include "aoifl/evt.hpp"
#include "aoifl/federation.hpp"
#include "aoifl/lyapunov.hpp"
#include "aoifl/metrics.hpp"
#include "aoifl/phy.hpp"
#include "aoifl/random.hpp"
#include "aoifl/records.hpp"
#include "aoifl/sweep.hpp"
