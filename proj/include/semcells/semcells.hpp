#pragma once

#include "semcells/core.hpp"
#include "semcells/embeddings.hpp"
#include "semcells/evolution.hpp"
#include "semcells/harness.hpp"
#include "semcells/metrics.hpp"
#include "semcells/plot.hpp"
#include "semcells/random.hpp"
#include "semcells/text.hpp"
