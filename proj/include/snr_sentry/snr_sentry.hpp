#pragma once

#include "snr_sentry/algorithms.hpp"
#include "snr_sentry/bounds.hpp"
#include "snr_sentry/combinatorics.hpp"
#include "snr_sentry/config.hpp"
#include "snr_sentry/errors.hpp"
#include "snr_sentry/experiment.hpp"
#include "snr_sentry/linalg.hpp"
#include "snr_sentry/matrix_io.hpp"
#include "snr_sentry/qualifiers.hpp"
#include "snr_sentry/rule_syntax.hpp"
#include "snr_sentry/solvers.hpp"
#include "snr_sentry/tuning.hpp"
