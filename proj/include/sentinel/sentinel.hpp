#pragma once

#include "sentinel/adam.hpp"
#include "sentinel/autoencoder.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/linalg.hpp"
#include "sentinel/lstm.hpp"
#include "sentinel/mlp.hpp"
#include "sentinel/model_io.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/training.hpp"
#include "sentinel/version.hpp"
