#include "ltof/problems/problem.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"
#include "ltof/problems/nonconvex_qp.hpp"
#include "ltof/problems/portfolio.hpp"
#include "ltof/problems/toy2d.hpp"

namespace ltof::problems {

std::string to_string(RestorationPolicy policy) {
  switch (policy) {
    case RestorationPolicy::clip_normalize:
      return "clip_normalize";
    case RestorationPolicy::projection:
      return "projection";
    case RestorationPolicy::newton:
      return "newton";
  }
  return "unknown";
}

Violation violation(const ParametricProblem& problem, const Vector& x, const Vector& zeta) {
  Violation v;
  if (problem.m_ineq() > 0) {
    v.ineq = std::max(0.0, problem.ineq_residuals(x, zeta).maxCoeff());
  }
  if (problem.m_eq() > 0) {
    v.eq = problem.eq_residuals(x, zeta).cwiseAbs().maxCoeff();
  }
  return v;
}

std::shared_ptr<const ParametricProblem> problem_from_json(const nlohmann::json& j) {
  using namespace json_util;
  const auto& tag_json = field(j, "tag", "problem");
  if (!tag_json.is_string()) throw ParseError("problem.tag: expected a string");
  const std::string tag = tag_json.get<std::string>();
  if (tag == "portfolio") {
    return std::make_shared<PortfolioProblem>(
        matrix_from_json(field(j, "sigma", "problem"), "problem.sigma"),
        number(field(j, "risk_weight", "problem"), "problem.risk_weight"));
  }
  if (tag == "nonconvex_qp") {
    const Vector mu = vector_from_json(field(j, "mu", "problem"), "problem.mu");
    const auto n = mu.size();
    const auto& restarts = field(j, "restarts", "problem");
    const auto& seed = field(j, "restart_seed", "problem");
    if (!restarts.is_number_unsigned() || !seed.is_number_unsigned()) {
      throw ParseError("problem.restarts/restart_seed: expected nonnegative integers");
    }
    return std::make_shared<NonconvexQpProblem>(
        mu, matrix_from_json(field(j, "A", "problem"), "problem.A", n),
        vector_from_json(field(j, "b", "problem"), "problem.b"),
        matrix_from_json(field(j, "G", "problem"), "problem.G", n),
        vector_from_json(field(j, "h", "problem"), "problem.h"), restarts.get<std::size_t>(),
        seed.get<std::uint64_t>());
  }
  if (tag == "toy2d") return std::make_shared<Toy2dProblem>();
  throw ParseError("problem.tag: unknown problem '" + tag +
                   "' (expected portfolio, nonconvex_qp or toy2d)");
}

}  // namespace ltof::problems
