#pragma once

#include "fogddos/cloud_coordinator.hpp"
#include "fogddos/connection_tracker.hpp"
#include "fogddos/core_model.hpp"
#include "fogddos/device_firewall.hpp"
#include "fogddos/error.hpp"
#include "fogddos/fog_detectors.hpp"
#include "fogddos/metrics.hpp"
#include "fogddos/mitigation_rules.hpp"
#include "fogddos/ratio.hpp"
#include "fogddos/resources.hpp"
#include "fogddos/scenario_config.hpp"
#include "fogddos/scenario_runner.hpp"
#include "fogddos/trace_io.hpp"
#include "fogddos/traffic_generator.hpp"
