#pragma once

#include "seqshield/adversary.hpp"
#include "seqshield/coordinator.hpp"
#include "seqshield/errors.hpp"
#include "seqshield/experiments.hpp"
#include "seqshield/results_io.hpp"
#include "seqshield/rules.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"
