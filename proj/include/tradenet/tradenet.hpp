#pragma once

#include "tradenet/attributes.hpp"
#include "tradenet/connectivity.hpp"
#include "tradenet/ergm.hpp"
#include "tradenet/graph.hpp"
#include "tradenet/ingest.hpp"
#include "tradenet/netstats.hpp"
#include "tradenet/sbm.hpp"
