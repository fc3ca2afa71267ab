#pragma once

// Umbrella header for the EuroVoc classification toolkit.

#include "evoc/corpus.hpp"
#include "evoc/encoder.hpp"
#include "evoc/error.hpp"
#include "evoc/head.hpp"
#include "evoc/jex.hpp"
#include "evoc/metrics.hpp"
#include "evoc/registry.hpp"
#include "evoc/rng.hpp"
#include "evoc/service.hpp"
#include "evoc/stratify.hpp"
#include "evoc/text.hpp"
#include "evoc/thesaurus.hpp"
#include "evoc/tokenize.hpp"
