#pragma once

#include "adaptk/baselines.hpp"
#include "adaptk/core.hpp"
#include "adaptk/error.hpp"
#include "adaptk/fusion.hpp"
#include "adaptk/io.hpp"
#include "adaptk/metrics.hpp"
#include "adaptk/relevance.hpp"
#include "adaptk/report.hpp"
#include "adaptk/selection.hpp"
#include "adaptk/similarity.hpp"
#include "adaptk/synthetic.hpp"
#include "adaptk/thresholds.hpp"
