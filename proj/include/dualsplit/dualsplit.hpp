#pragma once

#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/numerics/spectral.hpp"
#include "dualsplit/oracle/reference_qp.hpp"
#include "dualsplit/sampling/distribution.hpp"
#include "dualsplit/sampling/rng.hpp"
#include "dualsplit/solvers/ama.hpp"
#include "dualsplit/solvers/bound_check.hpp"
#include "dualsplit/solvers/config.hpp"
#include "dualsplit/solvers/constants.hpp"
#include "dualsplit/solvers/dual_vars.hpp"
#include "dualsplit/solvers/prox_svrg.hpp"
#include "dualsplit/solvers/svr_ama.hpp"
#include "dualsplit/solvers/svr_ama_split.hpp"
#include "dualsplit/solvers/trace.hpp"
