#pragma once

#include "morphlab/error.hpp"
#include "morphlab/image.hpp"
#include "morphlab/latent.hpp"
#include "morphlab/ltf.hpp"
#include "morphlab/manifest.hpp"
#include "morphlab/metrics.hpp"
#include "morphlab/morph.hpp"
#include "morphlab/parallel.hpp"
#include "morphlab/quality.hpp"
#include "morphlab/report.hpp"
#include "morphlab/scores.hpp"
