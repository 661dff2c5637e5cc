#pragma once

#include "lims/bench.hpp"
#include "lims/datagen.hpp"
#include "lims/dataset.hpp"
#include "lims/index.hpp"
#include "lims/maintenance.hpp"
#include "lims/metric.hpp"
#include "lims/oracle.hpp"
#include "lims/partitioner.hpp"
#include "lims/query.hpp"
#include "lims/rank_model.hpp"
#include "lims/storage.hpp"
