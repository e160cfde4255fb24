#pragma once

#include "action.hpp"
#include "bounds.hpp"
#include "conjugate.hpp"
#include "diagnostics.hpp"
#include "dp_oracle.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "kernel.hpp"
#include "kernel_io.hpp"
#include "lbfgs.hpp"
#include "minorant.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "rate.hpp"
#include "report_io.hpp"
#include "simulate.hpp"
#include "target.hpp"
#include "types.hpp"
