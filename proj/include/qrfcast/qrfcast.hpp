#pragma once

#include "qrfcast/combine.hpp"
#include "qrfcast/dist.hpp"
#include "qrfcast/error_model.hpp"
#include "qrfcast/errors.hpp"
#include "qrfcast/ingest.hpp"
#include "qrfcast/pipeline.hpp"
#include "qrfcast/qrf.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/scoring.hpp"
#include "qrfcast/synth.hpp"
#include "qrfcast/time.hpp"
