#pragma once

#include "seuda/baselines/histogram.hpp"
#include "seuda/baselines/settings.hpp"
#include "seuda/baselines/stl.hpp"
#include "seuda/core/config.hpp"
#include "seuda/core/errors.hpp"
#include "seuda/core/rng.hpp"
#include "seuda/core/tensor.hpp"
#include "seuda/data/image.hpp"
#include "seuda/data/manifest.hpp"
#include "seuda/data/phantom.hpp"
#include "seuda/data/preprocess.hpp"
#include "seuda/data/raster_io.hpp"
#include "seuda/data/split.hpp"
#include "seuda/metrics/overlap.hpp"
#include "seuda/metrics/postprocess.hpp"
#include "seuda/metrics/report.hpp"
#include "seuda/metrics/surface.hpp"
#include "seuda/seg/segmenter.hpp"
#include "seuda/uda/adaptation.hpp"
#include "seuda/uda/checkpoint.hpp"
#include "seuda/uda/networks.hpp"
#include "seuda/uda/pool.hpp"
#include "seuda/uda/schedule.hpp"
