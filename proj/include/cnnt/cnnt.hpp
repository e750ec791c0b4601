#pragma once

#include "cnnt/boards.hpp"
#include "cnnt/dse.hpp"
#include "cnnt/errors.hpp"
#include "cnnt/fixedpoint.hpp"
#include "cnnt/netspec.hpp"
#include "cnnt/perf_model.hpp"
#include "cnnt/random.hpp"
#include "cnnt/reference_engine.hpp"
#include "cnnt/report_io.hpp"
#include "cnnt/tensor.hpp"
#include "cnnt/tiled_engine.hpp"
#include "cnnt/weights_io.hpp"
