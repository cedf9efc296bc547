#pragma once

#include "imforge/certificate.hpp"
#include "imforge/certify.hpp"
#include "imforge/error.hpp"
#include "imforge/expander.hpp"
#include "imforge/gadgets.hpp"
#include "imforge/generators.hpp"
#include "imforge/graph.hpp"
#include "imforge/immersion_dense.hpp"
#include "imforge/immersion_medium.hpp"
#include "imforge/nibble.hpp"
#include "imforge/pipeline.hpp"
#include "imforge/rng.hpp"
#include "imforge/spectral.hpp"
#include "imforge/subdivision.hpp"
