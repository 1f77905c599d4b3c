#pragma once

#include "roboinspect/backends.hpp"
#include "roboinspect/behavior_check.hpp"
#include "roboinspect/campaign.hpp"
#include "roboinspect/core.hpp"
#include "roboinspect/error.hpp"
#include "roboinspect/geometry.hpp"
#include "roboinspect/hashing.hpp"
#include "roboinspect/instructions.hpp"
#include "roboinspect/policy_parse.hpp"
#include "roboinspect/prompting.hpp"
#include "roboinspect/simworld.hpp"
#include "roboinspect/stats_report.hpp"
