#pragma once

/// Convenience umbrella: the whole library in one include.

#include "dualgda/anova.hpp"
#include "dualgda/csv.hpp"
#include "dualgda/cv.hpp"
#include "dualgda/dual.hpp"
#include "dualgda/errors.hpp"
#include "dualgda/fdist.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/metrics.hpp"
#include "dualgda/parallel.hpp"
#include "dualgda/pipeline.hpp"
#include "dualgda/rng.hpp"
#include "dualgda/schema.hpp"
#include "dualgda/selection.hpp"
#include "dualgda/serialize.hpp"
#include "dualgda/synth.hpp"
#include "dualgda/table.hpp"
