#pragma once

#include "qzt/config.hpp"
#include "qzt/cvqnn.hpp"
#include "qzt/encoding.hpp"
#include "qzt/error.hpp"
#include "qzt/flows.hpp"
#include "qzt/metrics.hpp"
#include "qzt/pipeline.hpp"
#include "qzt/policy.hpp"
#include "qzt/qsim.hpp"
#include "qzt/random.hpp"
#include "qzt/textio.hpp"
#include "qzt/vqc.hpp"
