#pragma once

#include "selfheal/value.hpp"
#include "selfheal/genetic_code.hpp"
#include "selfheal/cell.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/placement.hpp"
#include "selfheal/timing.hpp"
#include "selfheal/fabric.hpp"
#include "selfheal/oracle.hpp"
#include "selfheal/applications.hpp"
#include "selfheal/trace.hpp"
#include "selfheal/engine.hpp"
#include "selfheal/report.hpp"
#include "selfheal/scenario_io.hpp"
