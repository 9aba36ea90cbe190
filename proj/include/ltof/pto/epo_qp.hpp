#pragma once

#include "ltof/pto/predictor.hpp"
#include "ltof/qp/qp.hpp"

namespace ltof::pto {

/// The convex QP whose minimizer is problem.ground_truth(zeta) for the
/// portfolio and toy problems. Throws ContractViolation for other problems.
qp::QpProblem convex_qp_for(const problems::ParametricProblem& problem, const Vector& zeta);

/// Decision loss f(x*(zeta_hat), zeta) and, when `grad` is non-null, its exact
/// gradient in zeta_hat through the KKT conditions. The linear term of each
/// supported QP is -zeta_hat, so dL/dzeta_hat = -dL/dq. `solver` (optional)
/// must have been built for the same problem and is warm-started.
/// Throws SolverError when the solve is not certified optimal and
/// DegenerateSystem when the KKT system is singular.
double epo_qp_sample_loss(const problems::ParametricProblem& problem, const Vector& zeta_hat,
                          const Vector& zeta, Vector* grad, qp::QpSolver* solver = nullptr);

/// End-to-end training of the predictor through the QP solution. Elements
/// whose solve or KKT system fails are skipped and counted.
PredictorModel epo_qp_train_lr(const data::Dataset& dataset, const PtoConfig& config, double lr);
PredictorModel epo_qp_train(const data::Dataset& dataset, const PtoConfig& config);

}  // namespace ltof::pto
