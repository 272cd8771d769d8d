#pragma once

#include "euphrates/commands.hpp"
#include "euphrates/config.hpp"
#include "euphrates/error.hpp"
#include "euphrates/extrapolate.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/metadata.hpp"
#include "euphrates/metrics.hpp"
#include "euphrates/motion.hpp"
#include "euphrates/parallel.hpp"
#include "euphrates/roi.hpp"
#include "euphrates/scheduler.hpp"
#include "euphrates/socmodel.hpp"
#include "euphrates/synthetic.hpp"
#include "euphrates/trace_io.hpp"
