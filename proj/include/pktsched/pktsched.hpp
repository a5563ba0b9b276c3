#pragma once

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/bench.hpp"
#include "pktsched/core.hpp"
#include "pktsched/engine.hpp"
#include "pktsched/io.hpp"
#include "pktsched/offline.hpp"
#include "pktsched/policies.hpp"
