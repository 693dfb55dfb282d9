#pragma once

// Online stereo extrinsic self-calibration from pixel correspondences:
// per-pair estimation via rectifying-rotation optimization, closed-form
// aggregation over sequences, evaluation metrics, and a synthetic rig.

#include "stereocal/aggregate.hpp"
#include "stereocal/camera.hpp"
#include "stereocal/epipolar.hpp"
#include "stereocal/io.hpp"
#include "stereocal/metrics.hpp"
#include "stereocal/pipeline.hpp"
#include "stereocal/rectification.hpp"
#include "stereocal/so3.hpp"
#include "stereocal/solver.hpp"
#include "stereocal/synthetic.hpp"
#include "stereocal/types.hpp"
