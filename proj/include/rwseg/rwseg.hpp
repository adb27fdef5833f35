#pragma once

#include "rwseg/csr.hpp"
#include "rwseg/error.hpp"
#include "rwseg/feedback.hpp"
#include "rwseg/graph.hpp"
#include "rwseg/image.hpp"
#include "rwseg/imageio.hpp"
#include "rwseg/pipeline.hpp"
#include "rwseg/seeds.hpp"
#include "rwseg/solver.hpp"
#include "rwseg/strokes.hpp"
#include "rwseg/sweep.hpp"
#include "rwseg/synthetic.hpp"
#include "rwseg/trace_json.hpp"
#include "rwseg/walks.hpp"
