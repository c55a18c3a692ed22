#pragma once

// Umbrella header: the whole toolkit in dependency order.

#include "pddlkit/errors.hpp"
#include "pddlkit/source.hpp"

#include "pddlkit/ast.hpp"
#include "pddlkit/lexer.hpp"
#include "pddlkit/parse.hpp"
#include "pddlkit/render.hpp"
#include "pddlkit/extract.hpp"
#include "pddlkit/lint.hpp"

#include "pddlkit/state.hpp"
#include "pddlkit/ground.hpp"
#include "pddlkit/validate.hpp"

#include "pddlkit/plan.hpp"
#include "pddlkit/subprocess.hpp"
#include "pddlkit/planner.hpp"

#include "pddlkit/corpus.hpp"
#include "pddlkit/retrieval.hpp"

#include "pddlkit/gateway.hpp"
#include "pddlkit/http_provider.hpp"

#include "pddlkit/prompts.hpp"
#include "pddlkit/pipeline.hpp"

#include "pddlkit/dataset.hpp"
#include "pddlkit/metrics.hpp"
#include "pddlkit/runner.hpp"
