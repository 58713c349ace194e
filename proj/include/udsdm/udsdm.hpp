#pragma once

#include "udsdm/baselines.hpp"
#include "udsdm/config.hpp"
#include "udsdm/decision.hpp"
#include "udsdm/ingest.hpp"
#include "udsdm/io.hpp"
#include "udsdm/lstm.hpp"
#include "udsdm/metrics.hpp"
#include "udsdm/rng.hpp"
#include "udsdm/simulator.hpp"
#include "udsdm/synopsis.hpp"
#include "udsdm/t2fls.hpp"
