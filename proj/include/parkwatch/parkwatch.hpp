#pragma once

#include "parkwatch/background.hpp"
#include "parkwatch/binary_ops.hpp"
#include "parkwatch/config.hpp"
#include "parkwatch/core.hpp"
#include "parkwatch/dual_bg_detector.hpp"
#include "parkwatch/event_engine.hpp"
#include "parkwatch/frame_io.hpp"
#include "parkwatch/ncc_monitor.hpp"
#include "parkwatch/pipeline.hpp"
#include "parkwatch/single_bg_detector.hpp"
#include "parkwatch/synthgen.hpp"
#include "parkwatch/tracking.hpp"
