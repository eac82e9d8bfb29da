#pragma once

#include "adlsim/core.hpp"
#include "adlsim/rng.hpp"
#include "adlsim/text.hpp"
#include "adlsim/catalog.hpp"
#include "adlsim/floor_plan.hpp"
#include "adlsim/scheduler.hpp"
#include "adlsim/anomaly.hpp"
#include "adlsim/trajectory.hpp"
#include "adlsim/sensing.hpp"
#include "adlsim/metrics.hpp"
#include "adlsim/ingest.hpp"
#include "adlsim/pipeline.hpp"
