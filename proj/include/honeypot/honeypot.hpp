#pragma once

#include "honeypot/assessment.hpp"
#include "honeypot/config.hpp"
#include "honeypot/coverage.hpp"
#include "honeypot/graph.hpp"
#include "honeypot/pipelines.hpp"
#include "honeypot/random.hpp"
#include "honeypot/spread.hpp"
#include "honeypot/wheel.hpp"
