#pragma once

#include "ffpred/core.hpp"
#include "ffpred/csv.hpp"
#include "ffpred/eval.hpp"
#include "ffpred/features.hpp"
#include "ffpred/ingest.hpp"
#include "ffpred/mlp.hpp"
#include "ffpred/pipeline.hpp"
#include "ffpred/rng.hpp"
#include "ffpred/selection.hpp"
#include "ffpred/svr.hpp"
