#pragma once

// Umbrella header.

#include "cellsna/aggregation.hpp"
#include "cellsna/cell_graph.hpp"
#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"
#include "cellsna/features.hpp"
#include "cellsna/graph_builder.hpp"
#include "cellsna/kd_tree.hpp"
#include "cellsna/manifest.hpp"
#include "cellsna/measure_table.hpp"
#include "cellsna/measures.hpp"
#include "cellsna/model_selection.hpp"
#include "cellsna/parallel.hpp"
#include "cellsna/pipeline.hpp"
#include "cellsna/point_set.hpp"
#include "cellsna/random.hpp"
#include "cellsna/stats.hpp"
#include "cellsna/svm.hpp"
#include "cellsna/synthetic.hpp"
