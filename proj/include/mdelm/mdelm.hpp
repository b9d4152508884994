#pragma once

#include "mdelm/classifier.hpp"
#include "mdelm/csv.hpp"
#include "mdelm/dataset.hpp"
#include "mdelm/detector.hpp"
#include "mdelm/elm.hpp"
#include "mdelm/encoding.hpp"
#include "mdelm/errors.hpp"
#include "mdelm/press.hpp"
#include "mdelm/rng.hpp"
#include "mdelm/stats.hpp"
