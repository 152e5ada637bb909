#pragma once

#include "mvfuse/analysis.hpp"
#include "mvfuse/baselines.hpp"
#include "mvfuse/errors.hpp"
#include "mvfuse/experiment.hpp"
#include "mvfuse/fusion.hpp"
#include "mvfuse/fusion_global.hpp"
#include "mvfuse/fusion_local.hpp"
#include "mvfuse/io.hpp"
#include "mvfuse/kernel.hpp"
#include "mvfuse/metrics.hpp"
#include "mvfuse/partition.hpp"
#include "mvfuse/procrustes.hpp"
#include "mvfuse/rng.hpp"
#include "mvfuse/synthetic.hpp"
