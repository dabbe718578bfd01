#pragma once

#include "actmap/archive.hpp"
#include "actmap/commands.hpp"
#include "actmap/csv.hpp"
#include "actmap/dataset.hpp"
#include "actmap/error.hpp"
#include "actmap/evaluation.hpp"
#include "actmap/features.hpp"
#include "actmap/image_io.hpp"
#include "actmap/metrics.hpp"
#include "actmap/parallel.hpp"
#include "actmap/regression.hpp"
#include "actmap/rng.hpp"
#include "actmap/synthetic.hpp"
#include "actmap/tensor.hpp"
