#pragma once

#include "robust_unmix/baselines.hpp"
#include "robust_unmix/cenmf.hpp"
#include "robust_unmix/errors.hpp"
#include "robust_unmix/experiment.hpp"
#include "robust_unmix/init.hpp"
#include "robust_unmix/io.hpp"
#include "robust_unmix/metrics.hpp"
#include "robust_unmix/multiplicative.hpp"
#include "robust_unmix/objective.hpp"
#include "robust_unmix/synthgen.hpp"
#include "robust_unmix/types.hpp"
