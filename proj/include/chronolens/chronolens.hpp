#pragma once

// Single include pulling in the whole toolkit: date parsing, dataset
// ingestion, linear models, the micro network, unit analysis, and
// collection-level influence.

#include "chronolens/analysis.hpp"
#include "chronolens/common.hpp"
#include "chronolens/dates.hpp"
#include "chronolens/features.hpp"
#include "chronolens/image.hpp"
#include "chronolens/influence.hpp"
#include "chronolens/linear.hpp"
#include "chronolens/manifest.hpp"
#include "chronolens/model_io.hpp"
#include "chronolens/net.hpp"
#include "chronolens/synth.hpp"
