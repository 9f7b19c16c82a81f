#pragma once

#include "hmatch/analysis/analysis.hpp"
#include "hmatch/common.hpp"
#include "hmatch/crosstalk/model.hpp"
#include "hmatch/crosstalk/outputs.hpp"
#include "hmatch/crosstalk/steady_state.hpp"
#include "hmatch/crosstalk/tables.hpp"
#include "hmatch/csv.hpp"
#include "hmatch/design/lhs.hpp"
#include "hmatch/design/mcmc.hpp"
#include "hmatch/design/region.hpp"
#include "hmatch/design/rejection.hpp"
#include "hmatch/emulation/correlation.hpp"
#include "hmatch/emulation/diagnostics.hpp"
#include "hmatch/emulation/emulator.hpp"
#include "hmatch/emulation/regression.hpp"
#include "hmatch/io/artifacts.hpp"
#include "hmatch/io/emulator_json.hpp"
#include "hmatch/io/manifest.hpp"
#include "hmatch/matching/campaign.hpp"
#include "hmatch/matching/targets.hpp"
#include "hmatch/matching/wave.hpp"
#include "hmatch/simulator.hpp"
#include "hmatch/toy.hpp"
